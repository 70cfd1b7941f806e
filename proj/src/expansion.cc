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

#include "adademo/expansion.h"

#include <algorithm>
#include <string>

#include "adademo/error.h"
#include "adademo/parallel.h"

namespace adademo {

void ValidateRoundPlan(const RoundPlan& plan) {
  const std::string where = "round " + std::to_string(plan.round_index) + ": ";
  if (plan.round_index < 1) throw ConfigError(where + "round_index must be >= 1");
  if (plan.target_successes < 1) {
    throw ConfigError(where + "target_successes must be >= 1");
  }
  if (plan.per_task_cap < 0) throw ConfigError(where + "per_task_cap must be >= 0");
  if (plan.eval_report_episodes < 1) {
    throw ConfigError(where + "eval_report_episodes must be >= 1");
  }
  if (plan.uniform_quota < 0) throw ConfigError(where + "uniform_quota must be >= 0");
}

double AllocateBudgetEstimate(double success_rate, int target_successes) {
  if (!(success_rate > 0.0)) {
    throw DivergenceError(
        "success rate 0: the collection loop never terminates without a cap");
  }
  if (success_rate > 1.0) throw ConfigError("success rate above 1");
  const double e = static_cast<double>(target_successes);
  return e / success_rate - e;
}

bool RunPolicyEpisode(const Policy& policy, const GridTask& task,
                      Seed init_seed) {
  EnvState state = task.Reset(init_seed);
  const GoalDescription goal = task.Goal(state);
  const int w = task.spec().grid_width;
  const int h = task.spec().grid_height;
  std::vector<bool> visited(static_cast<std::size_t>(2 * w * h), false);
  while (true) {
    const std::size_t config =
        static_cast<std::size_t>((state.has_key ? w * h : 0) +
                                 state.agent_pos.y * w + state.agent_pos.x);
    if (visited[config]) return false;
    visited[config] = true;
    const ActionId action = policy.Act(goal, task.Observe(state));
    const StepResult r = task.Step(state, action);
    if (r.success) return true;
    if (r.done) return false;
    state = r.state;
  }
}

EvaluationReport EvaluatePolicy(const Policy& policy, const GridTask& task,
                                const SeedScope& scope, int episodes,
                                int threads) {
  std::vector<EpisodeOutcome> outcomes(episodes);
  ParallelFor(outcomes.size(), threads, [&](std::size_t i) {
    const Seed seed = scope.At(SeedPurpose::kEvaluation, i);
    outcomes[i] = {seed, RunPolicyEpisode(policy, task, seed)};
  });
  return EvaluationReport::FromEpisodes(task.task_id(), std::move(outcomes));
}

CollectionResult CollectForTask(const EpisodeRunner& run_episode,
                                const GridTask& task,
                                const CollectionOptions& options,
                                const SeedScope& scope,
                                const std::unordered_set<Seed>& existing) {
  if (options.target_successes < 1) {
    throw ConfigError("target_successes must be >= 1");
  }
  if (options.cap < 0) throw ConfigError("cap must be >= 0");

  CollectionResult result;
  result.demos.task_id = task.task_id();
  std::unordered_set<Seed> collected;
  const int threads = std::max(options.threads, 1);
  const std::size_t batch = threads == 1 ? 1 : 8 * threads;
  std::vector<char> outcomes;
  std::uint64_t next_episode = 0;

  auto finished = [&] {
    if (result.successes_seen >= options.target_successes) return true;
    if (static_cast<int>(result.demos.trajectories.size()) >= options.cap) {
      result.cap_reached = true;
      return true;
    }
    if (result.episodes_run >= options.max_episodes) {
      result.episode_limit_reached = true;
      return true;
    }
    return false;
  };

  while (!finished()) {
    // Speculatively run a batch; only the prefix up to the stop condition
    // is committed, so the result matches a sequential loop.
    outcomes.assign(batch, 0);
    const std::uint64_t first = next_episode;
    ParallelFor(batch, threads, [&](std::size_t j) {
      outcomes[j] =
          run_episode(scope.At(SeedPurpose::kCollection, first + j)) ? 1 : 0;
    });
    for (std::size_t j = 0; j < batch && !finished(); ++j) {
      const std::uint64_t episode = next_episode++;
      const Seed init_seed = scope.At(SeedPurpose::kCollection, episode);
      ++result.episodes_run;
      if (outcomes[j]) {
        ++result.successes_seen;
        continue;
      }
      if (existing.contains(init_seed) || collected.contains(init_seed)) {
        ++result.duplicates_skipped;
        continue;
      }
      std::optional<Trajectory> demo =
          OracleCollect(task, init_seed, options.collector,
                        scope.At(SeedPurpose::kCollector, episode), scope.round);
      if (!demo) {
        ++result.collector_skips;
        continue;
      }
      collected.insert(init_seed);
      result.demos.trajectories.push_back(std::move(*demo));
    }
  }
  return result;
}

TaskDataset CollectFresh(const GridTask& task, int quota,
                         const CollectorSpec& collector,
                         const SeedScope& scope,
                         const std::unordered_set<Seed>& existing,
                         SeedPurpose purpose) {
  if (quota < 0) throw ConfigError("quota must be >= 0");
  TaskDataset out;
  out.task_id = task.task_id();
  // Bounded: with failure_prob < 1 the expected attempts are finite; this
  // limit only trips on pathological collector settings.
  const std::uint64_t limit = 1000 * static_cast<std::uint64_t>(quota) + 1000;
  for (std::uint64_t i = 0;
       static_cast<int>(out.trajectories.size()) < quota; ++i) {
    if (i >= limit) {
      throw OracleError("task " + std::to_string(task.task_id()) +
                        ": collector refused too many fresh requests");
    }
    const Seed init_seed = scope.At(purpose, i);
    if (existing.contains(init_seed)) continue;
    std::optional<Trajectory> demo =
        OracleCollect(task, init_seed, collector,
                      scope.At(SeedPurpose::kCollector, i), scope.round);
    if (demo) out.trajectories.push_back(std::move(*demo));
  }
  return out;
}

std::vector<EvaluationReport> EvaluateSuite(const Policy& policy,
                                            const ExpansionContext& context,
                                            int policy_round, int episodes) {
  std::vector<EvaluationReport> reports;
  reports.reserve(context.suite.size());
  for (const GridTask& task : context.suite) {
    const SeedScope scope{context.master_seed, policy_round, task.task_id()};
    reports.push_back(
        EvaluatePolicy(policy, task, scope, episodes, context.threads));
  }
  return reports;
}

namespace {

void CheckRoundInputs(const ExpansionContext& context, const RoundPlan& plan,
                      const DemoDataset& so_far) {
  ValidateRoundPlan(plan);
  if (plan.round_index != so_far.round_index + 1) {
    throw ConfigError("round " + std::to_string(plan.round_index) +
                      " cannot follow a dataset at round " +
                      std::to_string(so_far.round_index));
  }
  if (so_far.num_tasks() != static_cast<int>(context.suite.size())) {
    throw StructuralError("dataset and suite disagree on the task count");
  }
}

std::unordered_set<Seed> SeedsOf(const TaskDataset& task) {
  std::unordered_set<Seed> seeds;
  for (const Trajectory& t : task.trajectories) seeds.insert(t.init_seed);
  return seeds;
}

std::vector<EvaluationReport> ReportsBefore(
    const Policy& policy, const ExpansionContext& context,
    const RoundPlan& plan, const DemoDataset& so_far,
    const std::vector<EvaluationReport>* given) {
  if (given) {
    if (given->size() != context.suite.size()) {
      throw StructuralError("reports_before does not cover the suite");
    }
    return *given;
  }
  return EvaluateSuite(policy, context, so_far.round_index,
                       plan.eval_report_episodes);
}

// Merge, retrain from scratch, evaluate.
void FinishRound(const ExpansionContext& context, const RoundPlan& plan,
                 const SamplingStrategy& strategy, const DemoDataset& so_far,
                 RoundResult& result) {
  result.new_demos.round_index = plan.round_index;
  const DemoDataset parts[] = {so_far, result.new_demos};
  result.merged = MergeDatasets(parts);
  result.train_weights =
      ComputeTaskWeights(DatasetCounts(result.merged), strategy);
  result.policy_after =
      Train(result.merged, strategy, context.learner, kActionCount,
            DeriveSeed(context.master_seed, SeedPurpose::kTraining,
                       plan.round_index, 0, 0));
  result.reports_after =
      EvaluateSuite(result.policy_after, context, plan.round_index,
                    plan.eval_report_episodes);
}

RoundResult FailureGatedRound(const Policy& policy,
                              const ExpansionContext& context,
                              const RoundPlan& plan,
                              const SamplingStrategy& train_strategy,
                              const DemoDataset& so_far,
                              const std::vector<EvaluationReport>* before) {
  CheckRoundInputs(context, plan, so_far);
  RoundResult result;
  result.reports_before = ReportsBefore(policy, context, plan, so_far, before);
  result.new_demos =
      DemoDataset::Empty(static_cast<int>(context.suite.size()), plan.round_index);

  CollectionOptions options;
  options.target_successes = plan.target_successes;
  options.cap = plan.per_task_cap;
  options.collector = context.collector;
  options.max_episodes = context.max_episodes_per_task;
  options.threads = context.threads;
  for (const GridTask& task : context.suite) {
    const int k = task.task_id();
    const EpisodeRunner runner = [&policy, &task](Seed s) {
      return RunPolicyEpisode(policy, task, s);
    };
    CollectionResult c =
        CollectForTask(runner, task, options,
                       SeedScope{context.master_seed, plan.round_index, k},
                       SeedsOf(so_far.per_task[k]));
    result.new_demos.per_task[k] = std::move(c.demos);
    result.collection.push_back({c.successes_seen, c.episodes_run,
                                 c.collector_skips, c.duplicates_skipped,
                                 c.cap_reached});
  }
  FinishRound(context, plan, train_strategy, so_far, result);
  return result;
}

RoundResult FreshRound(const Policy& policy, const ExpansionContext& context,
                       const RoundPlan& plan, std::span<const int> quotas,
                       const SamplingStrategy& train_strategy,
                       const DemoDataset& so_far,
                       const std::vector<EvaluationReport>* before) {
  CheckRoundInputs(context, plan, so_far);
  RoundResult result;
  // Reported only; collection below never looks at it.
  result.reports_before = ReportsBefore(policy, context, plan, so_far, before);
  result.new_demos =
      DemoDataset::Empty(static_cast<int>(context.suite.size()), plan.round_index);
  for (const GridTask& task : context.suite) {
    const int k = task.task_id();
    result.new_demos.per_task[k] = CollectFresh(
        task, quotas[k], context.collector,
        SeedScope{context.master_seed, plan.round_index, k},
        SeedsOf(so_far.per_task[k]));
  }
  FinishRound(context, plan, train_strategy, so_far, result);
  return result;
}

SamplingStrategy UniformOverTask(const SamplingStrategy& base) {
  return {SamplingKind::kUniformOverTask, base.min_task_weight};
}

}  // namespace

RoundResult RunRoundAdaDemo(const Policy& policy,
                            const ExpansionContext& context,
                            const RoundPlan& plan,
                            const SamplingStrategy& strategy,
                            const DemoDataset& dataset_so_far,
                            const std::vector<EvaluationReport>* reports_before) {
  return FailureGatedRound(policy, context, plan, strategy, dataset_so_far,
                           reports_before);
}

RoundResult RunRoundUniform(const Policy& policy,
                            const ExpansionContext& context,
                            const RoundPlan& plan,
                            const DemoDataset& dataset_so_far,
                            const std::vector<EvaluationReport>* reports_before) {
  const std::vector<int> quotas(context.suite.size(), plan.uniform_quota);
  return FreshRound(policy, context, plan, quotas,
                    {SamplingKind::kUniformOverTask, 0.0}, dataset_so_far,
                    reports_before);
}

const char* AblationVariantName(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kA:
      return "A";
    case AblationVariant::kAB:
      return "AB";
    case AblationVariant::kABC:
      return "ABC";
  }
  return "?";
}

RoundResult RunRoundAblation(AblationVariant variant, const Policy& policy,
                             const ExpansionContext& context,
                             const RoundPlan& plan,
                             const SamplingStrategy& strategy,
                             const DemoDataset& dataset_so_far,
                             std::optional<std::vector<int>> reference_counts,
                             const std::vector<EvaluationReport>* reports_before) {
  switch (variant) {
    case AblationVariant::kA: {
      if (!reference_counts ||
          reference_counts->size() != context.suite.size()) {
        throw ConfigError(
            "ablation A needs reference per-task counts for every task");
      }
      for (int c : *reference_counts) {
        if (c < 0) throw ConfigError("negative reference count");
      }
      return FreshRound(policy, context, plan, *reference_counts,
                        UniformOverTask(strategy), dataset_so_far,
                        reports_before);
    }
    case AblationVariant::kAB:
      return FailureGatedRound(policy, context, plan, UniformOverTask(strategy),
                               dataset_so_far, reports_before);
    case AblationVariant::kABC:
      return RunRoundAdaDemo(policy, context, plan, strategy, dataset_so_far,
                             reports_before);
  }
  throw ConfigError("unknown ablation variant");
}

}  // namespace adademo
