// Copyright 2026 The AdaDemo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adademo/core.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "adademo/error.h"

namespace adademo {

std::size_t TaskDataset::TransitionCount() const {
  std::size_t total = 0;
  for (const Trajectory& t : trajectories) total += t.transitions.size();
  return total;
}

DemoDataset DemoDataset::Empty(int num_tasks, int round_index) {
  DemoDataset dataset;
  dataset.round_index = round_index;
  dataset.per_task.resize(num_tasks);
  for (int k = 0; k < num_tasks; ++k) dataset.per_task[k].task_id = k;
  return dataset;
}

std::size_t DemoDataset::TrajectoryCount() const {
  std::size_t total = 0;
  for (const TaskDataset& task : per_task) total += task.trajectories.size();
  return total;
}

std::size_t DemoDataset::TransitionCount() const {
  std::size_t total = 0;
  for (const TaskDataset& task : per_task) total += task.TransitionCount();
  return total;
}

namespace {

bool AllFinite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void ValidateDataset(const DemoDataset& dataset, const DatasetSchema& schema) {
  if (dataset.num_tasks() != schema.num_tasks) {
    throw StructuralError("dataset has " + std::to_string(dataset.num_tasks()) +
                          " tasks, schema expects " +
                          std::to_string(schema.num_tasks));
  }
  if (dataset.round_index < 0) {
    throw StructuralError("negative round_index");
  }
  for (int k = 0; k < dataset.num_tasks(); ++k) {
    const TaskDataset& task = dataset.per_task[k];
    if (task.task_id != k) {
      throw StructuralError("task entry " + std::to_string(k) +
                            " carries task_id " + std::to_string(task.task_id));
    }
    std::unordered_set<Seed> seen;
    for (const Trajectory& t : task.trajectories) {
      const std::string where = "task " + std::to_string(k) + " init_seed " +
                                std::to_string(t.init_seed);
      if (t.transitions.empty()) {
        throw SchemaError(where + ": empty trajectory");
      }
      if (static_cast<int>(t.goal.size()) != schema.goal_dim ||
          !AllFinite(t.goal)) {
        throw SchemaError(where + ": goal dimension or value invalid");
      }
      if (t.source_round < 0) {
        throw SchemaError(where + ": negative source_round");
      }
      for (const Transition& tr : t.transitions) {
        if (static_cast<int>(tr.observation.size()) != schema.obs_dim ||
            !AllFinite(tr.observation)) {
          throw SchemaError(where + ": observation dimension or value invalid");
        }
        if (tr.action < 0 || tr.action >= schema.action_count) {
          throw SchemaError(where + ": action " + std::to_string(tr.action) +
                            " out of range");
        }
      }
      if (!seen.insert(t.init_seed).second) {
        throw DuplicateDemoError(where + ": duplicate initial state");
      }
    }
  }
}

DemoDataset MergeDatasets(std::span<const DemoDataset> datasets) {
  if (datasets.empty()) {
    throw StructuralError("merge of zero datasets");
  }
  const int num_tasks = datasets.front().num_tasks();
  DemoDataset merged = DemoDataset::Empty(num_tasks, 0);
  std::vector<std::unordered_set<Seed>> seen(num_tasks);
  for (const DemoDataset& d : datasets) {
    if (d.num_tasks() != num_tasks) {
      throw StructuralError("cannot merge datasets with " +
                            std::to_string(num_tasks) + " and " +
                            std::to_string(d.num_tasks()) + " tasks");
    }
    merged.round_index = std::max(merged.round_index, d.round_index);
    for (int k = 0; k < num_tasks; ++k) {
      if (d.per_task[k].task_id != k) {
        throw StructuralError("task entries out of order");
      }
      for (const Trajectory& t : d.per_task[k].trajectories) {
        if (!seen[k].insert(t.init_seed).second) {
          throw DuplicateDemoError("task " + std::to_string(k) +
                                   ": init_seed " + std::to_string(t.init_seed) +
                                   " collected twice");
        }
        merged.per_task[k].trajectories.push_back(t);
      }
    }
  }
  return merged;
}

std::vector<TaskCount> DatasetCounts(const DemoDataset& dataset) {
  std::vector<TaskCount> counts;
  counts.reserve(dataset.per_task.size());
  for (const TaskDataset& task : dataset.per_task) {
    counts.push_back({task.task_id, task.trajectories.size(),
                      task.TransitionCount()});
  }
  return counts;
}

EvaluationReport EvaluationReport::FromEpisodes(
    int task_id, std::vector<EpisodeOutcome> episodes) {
  EvaluationReport report;
  report.task_id = task_id;
  int successes = 0;
  for (const EpisodeOutcome& e : episodes) {
    if (e.success) {
      ++successes;
    } else {
      report.failed_seeds.push_back(e.init_seed);
    }
  }
  report.success_rate =
      episodes.empty() ? 0.0
                       : static_cast<double>(successes) /
                             static_cast<double>(episodes.size());
  report.episodes = std::move(episodes);
  return report;
}

double EvaluationReport::StandardError() const {
  if (episodes.empty()) return 0.0;
  const double p = success_rate;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(episodes.size()));
}

}  // namespace adademo
