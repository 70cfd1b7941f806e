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

#include <fstream>
#include <string>

#include <json.hpp>

#include "adademo/core.h"
#include "adademo/error.h"

namespace adademo {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kFormatName[] = "adademo-dataset";
constexpr int kFormatVersion = 1;

ordered_json TrajectoryToJson(int task_id, const Trajectory& t) {
  ordered_json record;
  record["task_id"] = task_id;
  record["source_round"] = t.source_round;
  record["init_seed"] = t.init_seed;
  record["goal"] = t.goal;
  ordered_json transitions = ordered_json::array();
  for (const Transition& tr : t.transitions) {
    transitions.push_back(ordered_json::array({tr.observation, tr.action}));
  }
  record["transitions"] = std::move(transitions);
  return record;
}

template <typename T>
T Field(const ordered_json& j, const char* key, int line) {
  if (!j.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'", line);
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad field '") + key + "': " + e.what(), line);
  }
}

}  // namespace

void SaveDataset(const DemoDataset& dataset, const DatasetSchema& schema,
                 const std::string& path) {
  ValidateDataset(dataset, schema);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");

  ordered_json header;
  header["format"] = kFormatName;
  header["version"] = kFormatVersion;
  header["num_tasks"] = schema.num_tasks;
  header["goal_dim"] = schema.goal_dim;
  header["obs_dim"] = schema.obs_dim;
  header["action_count"] = schema.action_count;
  header["round_index"] = dataset.round_index;
  out << header.dump() << '\n';
  for (const TaskDataset& task : dataset.per_task) {
    for (const Trajectory& t : task.trajectories) {
      out << TrajectoryToJson(task.task_id, t).dump() << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path);
}

LoadedDataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);

  LoadedDataset loaded;
  std::string text;
  int line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line);
    }
    if (!j.is_object()) throw ParseError("record is not an object", line);

    if (!have_header) {
      if (Field<std::string>(j, "format", line) != kFormatName) {
        throw ParseError("not a dataset file", line);
      }
      const int version = Field<int>(j, "version", line);
      if (version != kFormatVersion) {
        throw ParseError("unsupported version " + std::to_string(version),
                         line);
      }
      DatasetSchema& s = loaded.schema;
      s.num_tasks = Field<int>(j, "num_tasks", line);
      s.goal_dim = Field<int>(j, "goal_dim", line);
      s.obs_dim = Field<int>(j, "obs_dim", line);
      s.action_count = Field<int>(j, "action_count", line);
      if (s.num_tasks < 1 || s.goal_dim < 1 || s.obs_dim < 1 ||
          s.action_count < 1) {
        throw ParseError("non-positive dimension in header", line);
      }
      loaded.dataset =
          DemoDataset::Empty(s.num_tasks, Field<int>(j, "round_index", line));
      have_header = true;
      continue;
    }

    const int task_id = Field<int>(j, "task_id", line);
    if (task_id < 0 || task_id >= loaded.schema.num_tasks) {
      throw SchemaError("line " + std::to_string(line) + ": task_id " +
                        std::to_string(task_id) + " outside header range");
    }
    Trajectory t;
    t.source_round = Field<int>(j, "source_round", line);
    t.init_seed = Field<Seed>(j, "init_seed", line);
    t.goal = Field<std::vector<double>>(j, "goal", line);
    const auto transitions = Field<ordered_json>(j, "transitions", line);
    if (!transitions.is_array()) {
      throw ParseError("transitions is not an array", line);
    }
    for (const ordered_json& pair : transitions) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("transition is not an [observation, action] pair",
                         line);
      }
      try {
        t.transitions.push_back(
            {pair[0].get<Observation>(), pair[1].get<ActionId>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad transition: ") + e.what(), line);
      }
    }
    if (static_cast<int>(t.goal.size()) != loaded.schema.goal_dim) {
      throw SchemaError("line " + std::to_string(line) + ": goal has " +
                        std::to_string(t.goal.size()) +
                        " entries, header declares " +
                        std::to_string(loaded.schema.goal_dim));
    }
    loaded.dataset.per_task[task_id].trajectories.push_back(std::move(t));
  }
  if (!have_header) throw ParseError("missing header", line);
  ValidateDataset(loaded.dataset, loaded.schema);
  return loaded;
}

DemoDataset LoadDataset(const std::string& path,
                        const DatasetSchema& expected) {
  LoadedDataset loaded = LoadDataset(path);
  if (!(loaded.schema == expected)) {
    const DatasetSchema& s = loaded.schema;
    throw SchemaError(
        path + ": saved with (tasks=" + std::to_string(s.num_tasks) +
        ", goal_dim=" + std::to_string(s.goal_dim) +
        ", obs_dim=" + std::to_string(s.obs_dim) +
        ", actions=" + std::to_string(s.action_count) +
        "), run expects (tasks=" + std::to_string(expected.num_tasks) +
        ", goal_dim=" + std::to_string(expected.goal_dim) +
        ", obs_dim=" + std::to_string(expected.obs_dim) +
        ", actions=" + std::to_string(expected.action_count) + ")");
  }
  return std::move(loaded.dataset);
}

}  // namespace adademo
