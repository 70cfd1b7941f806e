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

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "adademo/error.h"
#include "adademo/harness.h"

namespace adademo {
namespace {

using json = nlohmann::json;

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T Get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <typename T>
T Require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return Get<T>(j, key, where, T{});
}

TaskSpec ParseTask(const json& j, int index) {
  const std::string where = "suite[" + std::to_string(index) + "]";
  CheckKeys(j,
            {"task_id", "grid_width", "grid_height", "obstacle_density",
             "requires_key", "horizon", "layout_seed"},
            where);
  TaskSpec t;
  t.task_id = Get<int>(j, "task_id", where, index);
  t.grid_width = Require<int>(j, "grid_width", where);
  t.grid_height = Require<int>(j, "grid_height", where);
  t.obstacle_density = Get<double>(j, "obstacle_density", where, 0.0);
  t.requires_key = Get<bool>(j, "requires_key", where, false);
  t.horizon = Require<int>(j, "horizon", where);
  t.layout_seed = Require<Seed>(j, "layout_seed", where);
  return t;
}

RoundPlan ParseRound(const json& j, int index) {
  const std::string where = "rounds[" + std::to_string(index) + "]";
  CheckKeys(j,
            {"round_index", "target_successes", "per_task_cap",
             "eval_report_episodes", "uniform_quota"},
            where);
  RoundPlan p;
  p.round_index = Get<int>(j, "round_index", where, index + 1);
  p.target_successes = Require<int>(j, "target_successes", where);
  if (j.contains("per_task_cap") && !j.at("per_task_cap").is_null()) {
    p.per_task_cap = Get<int>(j, "per_task_cap", where, kNoCap);
  }
  p.eval_report_episodes = Get<int>(j, "eval_report_episodes", where, 100);
  p.uniform_quota = Get<int>(j, "uniform_quota", where, 0);
  return p;
}

}  // namespace

const char* CapacityBasisName(CapacityBasis basis) {
  return basis == CapacityBasis::kInitial ? "initial" : "current";
}

const char* MethodName(Method method) {
  switch (method) {
    case Method::kAdaDemo:
      return "adademo";
    case Method::kUniform:
      return "uniform";
    case Method::kAblationA:
      return "ablation_A";
    case Method::kAblationAB:
      return "ablation_AB";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  if (name == "adademo" || name == "ablation_ABC") return Method::kAdaDemo;
  if (name == "uniform") return Method::kUniform;
  if (name == "ablation_A") return Method::kAblationA;
  if (name == "ablation_AB") return Method::kAblationAB;
  throw ConfigError("unknown method '" + name + "'");
}

RunConfig ParseConfig(const json& j) {
  CheckKeys(j,
            {"suite", "rounds", "method", "strategy", "learner", "collector",
             "master_seed", "initial_demos_per_task", "num_seeds", "threads",
             "max_episodes_per_task"},
            "config");
  RunConfig c;
  if (!j.contains("suite") || !j.at("suite").is_array()) {
    throw ConfigError("config.suite must be an array of tasks");
  }
  for (std::size_t i = 0; i < j.at("suite").size(); ++i) {
    c.suite.push_back(ParseTask(j.at("suite")[i], static_cast<int>(i)));
  }
  if (!j.contains("rounds") || !j.at("rounds").is_array()) {
    throw ConfigError("config.rounds must be an array of round plans");
  }
  for (std::size_t i = 0; i < j.at("rounds").size(); ++i) {
    c.rounds.push_back(ParseRound(j.at("rounds")[i], static_cast<int>(i)));
  }
  c.method = ParseMethod(Get<std::string>(j, "method", "config", "adademo"));

  const double default_floor =
      c.suite.empty() ? 0.0 : 0.5 / static_cast<double>(c.suite.size());
  c.strategy.min_task_weight = default_floor;
  if (j.contains("strategy")) {
    const json& s = j.at("strategy");
    CheckKeys(s, {"kind", "min_task_weight"}, "strategy");
    c.strategy.kind = ParseSamplingKind(Get<std::string>(
        s, "kind", "strategy", SamplingKindName(c.strategy.kind)));
    c.strategy.min_task_weight =
        Get<double>(s, "min_task_weight", "strategy", default_floor);
  }
  if (j.contains("learner")) {
    const json& l = j.at("learner");
    CheckKeys(l,
              {"kind", "capacity", "capacity_fraction", "capacity_basis", "sgd_steps",
               "learning_rate", "batch_size"},
              "learner");
    LearnerSettings& s = c.learner;
    s.kind = ParsePolicyKind(
        Get<std::string>(l, "kind", "learner", PolicyKindName(s.kind)));
    s.capacity = Get<int>(l, "capacity", "learner", s.capacity);
    s.capacity_fraction =
        Get<double>(l, "capacity_fraction", "learner", s.capacity_fraction);
    const std::string basis = Get<std::string>(
        l, "capacity_basis", "learner", CapacityBasisName(s.capacity_basis));
    if (basis == "initial") {
      s.capacity_basis = CapacityBasis::kInitial;
    } else if (basis == "current") {
      s.capacity_basis = CapacityBasis::kCurrent;
    } else {
      throw ConfigError("learner.capacity_basis must be initial or current");
    }
    s.sgd_steps = Get<int>(l, "sgd_steps", "learner", s.sgd_steps);
    s.learning_rate = Get<double>(l, "learning_rate", "learner", s.learning_rate);
    s.batch_size = Get<int>(l, "batch_size", "learner", s.batch_size);
  }
  if (j.contains("collector")) {
    const json& k = j.at("collector");
    CheckKeys(k, {"failure_prob", "retries"}, "collector");
    c.collector.failure_prob = Get<double>(k, "failure_prob", "collector", 0.0);
    c.collector.retries = Get<int>(k, "retries", "collector", 0);
  }
  c.master_seed = Get<Seed>(j, "master_seed", "config", 0);
  c.initial_demos_per_task =
      Get<int>(j, "initial_demos_per_task", "config", c.initial_demos_per_task);
  c.num_seeds = Get<int>(j, "num_seeds", "config", c.num_seeds);
  c.threads = Get<int>(j, "threads", "config", c.threads);
  c.max_episodes_per_task =
      Get<int>(j, "max_episodes_per_task", "config", c.max_episodes_per_task);
  return c;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ParseConfig(j);
}

nlohmann::ordered_json ConfigToJson(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["suite"] = nlohmann::ordered_json::array();
  for (const TaskSpec& t : c.suite) {
    nlohmann::ordered_json task;
    task["task_id"] = t.task_id;
    task["grid_width"] = t.grid_width;
    task["grid_height"] = t.grid_height;
    task["obstacle_density"] = t.obstacle_density;
    task["requires_key"] = t.requires_key;
    task["horizon"] = t.horizon;
    task["layout_seed"] = t.layout_seed;
    j["suite"].push_back(std::move(task));
  }
  j["rounds"] = nlohmann::ordered_json::array();
  for (const RoundPlan& p : c.rounds) {
    nlohmann::ordered_json round;
    round["round_index"] = p.round_index;
    round["target_successes"] = p.target_successes;
    if (p.per_task_cap == kNoCap) {
      round["per_task_cap"] = nullptr;
    } else {
      round["per_task_cap"] = p.per_task_cap;
    }
    round["eval_report_episodes"] = p.eval_report_episodes;
    round["uniform_quota"] = p.uniform_quota;
    j["rounds"].push_back(std::move(round));
  }
  j["method"] = MethodName(c.method);
  j["strategy"] = {{"kind", SamplingKindName(c.strategy.kind)},
                   {"min_task_weight", c.strategy.min_task_weight}};
  j["learner"] = {{"kind", PolicyKindName(c.learner.kind)},
                  {"capacity", c.learner.capacity},
                  {"capacity_fraction", c.learner.capacity_fraction},
                  {"capacity_basis", CapacityBasisName(c.learner.capacity_basis)},
                  {"sgd_steps", c.learner.sgd_steps},
                  {"learning_rate", c.learner.learning_rate},
                  {"batch_size", c.learner.batch_size}};
  j["collector"] = {{"failure_prob", c.collector.failure_prob},
                    {"retries", c.collector.retries}};
  j["master_seed"] = c.master_seed;
  j["initial_demos_per_task"] = c.initial_demos_per_task;
  j["num_seeds"] = c.num_seeds;
  j["threads"] = c.threads;
  j["max_episodes_per_task"] = c.max_episodes_per_task;
  return j;
}

void ValidateConfig(const RunConfig& c) {
  if (c.suite.empty()) throw ConfigError("suite is empty");
  BuildSuite(c.suite);
  for (std::size_t i = 0; i < c.rounds.size(); ++i) {
    ValidateRoundPlan(c.rounds[i]);
    if (c.rounds[i].round_index != static_cast<int>(i) + 1) {
      throw ConfigError("round indices must run 1..R consecutively");
    }
  }
  if (c.rounds.size() > 255) throw ConfigError("at most 255 rounds");
  const double m = static_cast<double>(c.suite.size());
  if (!(c.strategy.min_task_weight >= 0.0) ||
      c.strategy.min_task_weight * m > 1.0 + 1e-12) {
    throw ConfigError("strategy.min_task_weight must be in [0, 1/M]");
  }
  const LearnerSettings& l = c.learner;
  if (l.capacity < 0) throw ConfigError("learner.capacity must be >= 0");
  if (l.capacity == 0 &&
      !(l.capacity_fraction > 0.0 && std::isfinite(l.capacity_fraction))) {
    throw ConfigError("learner.capacity_fraction must be positive");
  }
  if (l.sgd_steps < 0 || l.batch_size < 1 || !(l.learning_rate > 0.0)) {
    throw ConfigError("learner SGD settings out of range");
  }
  if (!(c.collector.failure_prob >= 0.0 && c.collector.failure_prob < 1.0)) {
    throw ConfigError("collector.failure_prob must be in [0, 1)");
  }
  if (c.collector.retries < 0) throw ConfigError("collector.retries must be >= 0");
  if (c.initial_demos_per_task < 1) {
    throw ConfigError("initial_demos_per_task must be >= 1");
  }
  if (c.num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (c.max_episodes_per_task < 1) {
    throw ConfigError("max_episodes_per_task must be >= 1");
  }
}

DatasetSchema SchemaFor(const RunConfig& config) {
  const int m = static_cast<int>(config.suite.size());
  return {m, GoalDim(m), kObservationDim, kActionCount};
}

}  // namespace adademo
