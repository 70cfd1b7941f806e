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

#ifndef ADADEMO_CORE_H_
#define ADADEMO_CORE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adademo/seeds.h"

namespace adademo {

// Task identity plus goal location, one-hot task id first.
using GoalDescription = std::vector<double>;
using Observation = std::vector<double>;
using ActionId = int;

struct Transition {
  Observation observation;
  ActionId action = 0;

  bool operator==(const Transition&) const = default;
};

// One demonstration: a goal plus the (observation, action) sequence that
// reaches it from the initial state identified by init_seed.
struct Trajectory {
  GoalDescription goal;
  std::vector<Transition> transitions;
  Seed init_seed = 0;
  int source_round = 0;

  bool operator==(const Trajectory&) const = default;
};

struct TaskDataset {
  int task_id = 0;
  std::vector<Trajectory> trajectories;

  std::size_t TransitionCount() const;
  bool operator==(const TaskDataset&) const = default;
};

struct DemoDataset {
  std::vector<TaskDataset> per_task;
  int round_index = 0;

  // Empty dataset with task ids 0..num_tasks-1.
  static DemoDataset Empty(int num_tasks, int round_index);

  int num_tasks() const { return static_cast<int>(per_task.size()); }
  std::size_t TrajectoryCount() const;
  std::size_t TransitionCount() const;

  bool operator==(const DemoDataset&) const = default;
};

// Dimensions every trajectory in a dataset must agree with.
struct DatasetSchema {
  int num_tasks = 0;
  int goal_dim = 0;
  int obs_dim = 0;
  int action_count = 0;

  bool operator==(const DatasetSchema&) const = default;
};

// Throws StructuralError, SchemaError or DuplicateDemoError when the dataset
// violates the task-ordering, dimension or unique-init_seed invariants.
void ValidateDataset(const DemoDataset& dataset, const DatasetSchema& schema);

// Concatenates per-task trajectories in input order. The result carries the
// largest input round_index.
DemoDataset MergeDatasets(std::span<const DemoDataset> datasets);

struct TaskCount {
  int task_id = 0;
  std::size_t trajectories = 0;
  std::size_t transitions = 0;

  bool operator==(const TaskCount&) const = default;
};

// Per-task trajectory (and transition) counts, ordered by task id.
std::vector<TaskCount> DatasetCounts(const DemoDataset& dataset);

struct EpisodeOutcome {
  Seed init_seed = 0;
  bool success = false;

  bool operator==(const EpisodeOutcome&) const = default;
};

struct EvaluationReport {
  int task_id = 0;
  std::vector<EpisodeOutcome> episodes;
  double success_rate = 0.0;
  std::vector<Seed> failed_seeds;

  // Fills success_rate and failed_seeds from the episode list.
  static EvaluationReport FromEpisodes(int task_id,
                                       std::vector<EpisodeOutcome> episodes);

  // Binomial standard error sqrt(p(1-p)/n).
  double StandardError() const;

  bool operator==(const EvaluationReport&) const = default;
};

// Line-delimited dataset persistence. The first line is a header object with
// the format version and schema; each following line is one trajectory.
void SaveDataset(const DemoDataset& dataset, const DatasetSchema& schema,
                 const std::string& path);

struct LoadedDataset {
  DatasetSchema schema;
  DemoDataset dataset;
};

LoadedDataset LoadDataset(const std::string& path);

// As above, but throws SchemaError unless the header matches `expected`.
DemoDataset LoadDataset(const std::string& path,
                        const DatasetSchema& expected);

}  // namespace adademo

#endif  // ADADEMO_CORE_H_
