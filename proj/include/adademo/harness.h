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

#ifndef ADADEMO_HARNESS_H_
#define ADADEMO_HARNESS_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adademo/core.h"
#include "adademo/envs.h"
#include "adademo/expansion.h"
#include "adademo/learner.h"

namespace adademo {

enum class Method { kAdaDemo, kUniform, kAblationA, kAblationAB };

const char* MethodName(Method method);
// Accepts the four names MethodName produces plus "ablation_ABC", an alias
// of "adademo".
Method ParseMethod(const std::string& name);

// Transition count a fractional capacity is taken of: the round-0 dataset
// (fixed for the run) or the dataset each policy is trained on.
enum class CapacityBasis { kInitial, kCurrent };

const char* CapacityBasisName(CapacityBasis basis);

struct LearnerSettings {
  PolicyKind kind = PolicyKind::kNearestNeighbor;
  // Absolute capacity; 0 derives it as capacity_fraction times the
  // transition count selected by capacity_basis.
  int capacity = 0;
  double capacity_fraction = 1.0;
  CapacityBasis capacity_basis = CapacityBasis::kCurrent;
  int sgd_steps = 2000;
  double learning_rate = 0.5;
  int batch_size = 32;
};

struct RunConfig {
  std::vector<TaskSpec> suite;
  std::vector<RoundPlan> rounds;
  Method method = Method::kAdaDemo;
  SamplingStrategy strategy;
  LearnerSettings learner;
  CollectorSpec collector;
  Seed master_seed = 0;
  int initial_demos_per_task = 20;
  // Seeds master_seed, master_seed + 1, ... are run and reported.
  int num_seeds = 3;
  // 0 uses every hardware thread.
  int threads = 0;
  int max_episodes_per_task = 1000000;
};

// Throws ConfigError on unknown keys, wrong types or violated invariants.
RunConfig ParseConfig(const nlohmann::json& j);
RunConfig LoadConfig(const std::string& path);
nlohmann::ordered_json ConfigToJson(const RunConfig& config);

// Checks field invariants and builds every task layout.
void ValidateConfig(const RunConfig& config);

// The shipped default: eight tasks, three rounds.
RunConfig DefaultConfig();

DatasetSchema SchemaFor(const RunConfig& config);

struct MetricsRow {
  std::string method;
  Seed seed = 0;
  int round = 0;
  // kAggregateTask marks the per-round aggregate row.
  int task_id = 0;
  double success_rate = 0.0;
  double sr_stderr = 0.0;
  long long new_demos = 0;
  long long cumulative_demos = 0;

  bool operator==(const MetricsRow&) const = default;
};
inline constexpr int kAggregateTask = -1;

// initial_demos_per_task oracle demonstrations per task from the seeds
// DeriveSeed(seed, kBootstrap, 0, task, i).
DemoDataset BootstrapInitialDataset(const RunConfig& config, Seed seed,
                                    std::span<const GridTask> suite);

// What an observer sees after each completed round of one seed.
struct RoundObservation {
  Method method;
  Seed seed;
  const std::vector<GridTask>* suite;
  const RoundPlan* plan;
  const Policy* policy_before;
  const RoundResult* result;
};

struct RunOptions {
  // Root for per-round checkpoints; empty disables them.
  std::string checkpoint_dir;
  // Round checkpoint directory to continue from.
  std::optional<std::string> resume_from;
  std::function<void(const RoundObservation&)> on_round;
  std::ostream* log = nullptr;
};

// Rows for one seed: a row per task and an aggregate row for round 0 and
// each configured round.
std::vector<MetricsRow> RunSeed(const RunConfig& config, Seed seed,
                                const RunOptions& options);

// RunSeed over every configured seed, rows sorted by (method, seed, round,
// task) with the aggregate row last in each round.
std::vector<MetricsRow> RunExperiment(const RunConfig& config,
                                      const RunOptions& options);

std::string MetricsCsv(const std::vector<MetricsRow>& rows);
std::string CurveCsv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> ParseMetricsCsv(const std::string& text);

// Writes metrics.csv and curve.csv into out_dir (created if missing).
void EmitReport(const std::vector<MetricsRow>& rows, const std::string& out_dir);

// Per-round aggregate over seeds, as plotted in curve.csv.
struct CurvePoint {
  std::string method;
  int round = 0;
  double cumulative_demos_mean = 0.0;
  double cumulative_demos_total = 0.0;
  double mean_sr = 0.0;
  double sr_stderr = 0.0;
};
std::vector<CurvePoint> ComputeCurve(const std::vector<MetricsRow>& rows);

// Command-line entry point. Returns 0 on success, 1 on usage or config
// errors, 2 on runtime failures.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace adademo

#endif  // ADADEMO_HARNESS_H_
