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

#ifndef ADADEMO_EXPANSION_H_
#define ADADEMO_EXPANSION_H_

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "adademo/core.h"
#include "adademo/envs.h"
#include "adademo/learner.h"
#include "adademo/seeds.h"

namespace adademo {

// Cap value meaning "no cap".
inline constexpr int kNoCap = std::numeric_limits<int>::max();

struct RoundPlan {
  int round_index = 1;
  // E_i: successful episodes per task that end the collection loop.
  int target_successes = 1;
  // Bound on new demonstrations per task in this round.
  int per_task_cap = kNoCap;
  // Fresh episodes per task for the reported success rate.
  int eval_report_episodes = 100;
  // New demonstrations per task for the Uniform baseline.
  int uniform_quota = 0;

  bool operator==(const RoundPlan&) const = default;
};

// Throws ConfigError unless every field is in range.
void ValidateRoundPlan(const RoundPlan& plan);

// Expected demonstrations collected before `target_successes` successes
// when each episode succeeds with `success_rate`: E/SR - E. Throws
// DivergenceError when success_rate is zero.
double AllocateBudgetEstimate(double success_rate, int target_successes);

// One episode from an initial state; true on success. Must be safe to call
// concurrently.
using EpisodeRunner = std::function<bool(Seed init_seed)>;

// Rolls `policy` out from Reset(init_seed). Stops early with failure when
// the (agent cell, has_key) configuration repeats, since a memoryless
// deterministic policy then cycles until the horizon.
bool RunPolicyEpisode(const Policy& policy, const GridTask& task,
                      Seed init_seed);

// `episodes` rollouts seeded by scope.At(kEvaluation, i).
EvaluationReport EvaluatePolicy(const Policy& policy, const GridTask& task,
                                const SeedScope& scope, int episodes,
                                int threads = 1);

struct CollectionOptions {
  int target_successes = 1;
  int cap = kNoCap;
  CollectorSpec collector;
  // Hard stop on episodes, guarding against a collector that always
  // refuses on a task the policy never solves.
  int max_episodes = 1000000;
  int threads = 1;
};

struct CollectionResult {
  TaskDataset demos;
  int successes_seen = 0;
  int episodes_run = 0;
  int collector_skips = 0;
  int duplicates_skipped = 0;
  bool cap_reached = false;
  bool episode_limit_reached = false;
};

// The failure-gated inner loop. Episode i starts from
// scope.At(kCollection, i); failures are handed to the collector (seed
// scope.At(kCollector, i)) unless the init_seed is in `existing` or was
// already collected this round. Stops at target_successes successes or
// `cap` collected demonstrations, whichever comes first. Episodes may run
// in parallel; results are committed in episode order.
CollectionResult CollectForTask(const EpisodeRunner& run_episode,
                                const GridTask& task,
                                const CollectionOptions& options,
                                const SeedScope& scope,
                                const std::unordered_set<Seed>& existing);

// Exactly `quota` demonstrations from fresh initial states
// scope.At(purpose, i), skipping refusals and seeds in `existing`.
TaskDataset CollectFresh(
    const GridTask& task, int quota, const CollectorSpec& collector,
    const SeedScope& scope, const std::unordered_set<Seed>& existing,
    SeedPurpose purpose = SeedPurpose::kFreshCollection);

// Everything a round needs besides the plan and the data.
struct ExpansionContext {
  std::span<const GridTask> suite;
  LearnerConfig learner;
  CollectorSpec collector;
  Seed master_seed = 0;
  int threads = 1;
  int max_episodes_per_task = 1000000;
};

struct TaskRoundStats {
  int successes_seen = 0;
  int episodes_run = 0;
  int collector_skips = 0;
  int duplicates_skipped = 0;
  bool cap_reached = false;
};

struct RoundResult {
  DemoDataset new_demos;
  DemoDataset merged;
  std::vector<EvaluationReport> reports_before;
  std::vector<EvaluationReport> reports_after;
  Policy policy_after;
  TaskWeights train_weights;
  // Empty for rounds without a collection loop.
  std::vector<TaskRoundStats> collection;
};

// Reported evaluation of the policy trained at `policy_round`.
std::vector<EvaluationReport> EvaluateSuite(const Policy& policy,
                                            const ExpansionContext& context,
                                            int policy_round, int episodes);

// Algorithm round: failure-gated collection per task, merge, retrain with
// `strategy`. `reports_before`, when given, must be the evaluation of
// `policy` (it is reused instead of re-running it).
RoundResult RunRoundAdaDemo(
    const Policy& policy, const ExpansionContext& context,
    const RoundPlan& plan, const SamplingStrategy& strategy,
    const DemoDataset& dataset_so_far,
    const std::vector<EvaluationReport>* reports_before = nullptr);

// Baseline round: plan.uniform_quota fresh demonstrations per task, no
// evaluation gating, retrain with uniform-over-task sampling.
RoundResult RunRoundUniform(
    const Policy& policy, const ExpansionContext& context,
    const RoundPlan& plan, const DemoDataset& dataset_so_far,
    const std::vector<EvaluationReport>* reports_before = nullptr);

enum class AblationVariant { kA, kAB, kABC };

const char* AblationVariantName(AblationVariant variant);

// kA: `reference_counts[k]` fresh demonstrations for task k, trained with
// uniform-over-task sampling. kAB: failure-gated collection, trained with
// uniform-over-task sampling. kABC: RunRoundAdaDemo. Throws ConfigError
// when kA lacks reference counts for every task.
RoundResult RunRoundAblation(
    AblationVariant variant, const Policy& policy,
    const ExpansionContext& context, const RoundPlan& plan,
    const SamplingStrategy& strategy, const DemoDataset& dataset_so_far,
    std::optional<std::vector<int>> reference_counts,
    const std::vector<EvaluationReport>* reports_before = nullptr);

}  // namespace adademo

#endif  // ADADEMO_EXPANSION_H_
