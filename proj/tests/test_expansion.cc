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

#include <doctest.h>

#include <set>
#include <unordered_set>
#include <vector>

#include "adademo/error.h"

using namespace adademo;

namespace {

TaskSpec Spec(int id, int size, double density, bool key) {
  TaskSpec s;
  s.task_id = id;
  s.grid_width = size;
  s.grid_height = size;
  s.obstacle_density = density;
  s.requires_key = key;
  s.horizon = 6 * size;
  s.layout_seed = 500 + id;
  return s;
}

// Succeeds on a fixed pseudo-random subset of seeds with probability p.
EpisodeRunner Bernoulli(double p) {
  return [p](Seed s) {
    return static_cast<double>(MixSeed(s ^ 0x5eed) >> 11) * 0x1.0p-53 < p;
  };
}

struct Fixture {
  std::vector<TaskSpec> specs{Spec(0, 5, 0.0, false), Spec(1, 7, 0.2, false),
                              Spec(2, 6, 0.1, true)};
  std::vector<GridTask> suite = BuildSuite(specs);
  ExpansionContext context;
  DemoDataset d0;
  Policy policy;
  SamplingStrategy strategy{SamplingKind::kUniformOverTrajectory, 0.1};

  explicit Fixture(Seed seed = 3) {
    context.suite = suite;
    context.master_seed = seed;
    context.learner.capacity = 150;
    d0 = DemoDataset::Empty(3, 0);
    for (const GridTask& task : suite) {
      d0.per_task[task.task_id()] = CollectFresh(
          task, 5, {}, SeedScope{seed, 0, task.task_id()}, {},
          SeedPurpose::kBootstrap);
    }
    policy = Train(d0, strategy, context.learner, kActionCount, 1);
  }

  RoundPlan Plan() const {
    RoundPlan plan;
    plan.round_index = 1;
    plan.target_successes = 5;
    plan.per_task_cap = 15;
    plan.eval_report_episodes = 40;
    plan.uniform_quota = 6;
    return plan;
  }
};

}  // namespace

TEST_CASE("budget estimate is E/SR - E") {
  CHECK(AllocateBudgetEstimate(0.5, 50) == 50.0);
  CHECK(AllocateBudgetEstimate(1.0, 37) == 0.0);
  CHECK(AllocateBudgetEstimate(0.2, 20) == doctest::Approx(80.0).epsilon(1e-12));
  for (double sr : {0.01, 0.13, 0.25, 0.5, 0.77, 0.99}) {
    for (int e : {1, 10, 50, 200}) {
      const double expected = e / sr - e;
      CHECK(std::abs(AllocateBudgetEstimate(sr, e) - expected) <= 1e-12 * (1 + expected));
    }
  }
  CHECK_THROWS_AS(AllocateBudgetEstimate(0.0, 10), DivergenceError);
  CHECK_THROWS_AS(AllocateBudgetEstimate(-0.1, 10), DivergenceError);
}

TEST_CASE("round plans are validated") {
  RoundPlan plan;
  plan.target_successes = 0;
  CHECK_THROWS_AS(ValidateRoundPlan(plan), ConfigError);
  plan.target_successes = 1;
  plan.round_index = 0;
  CHECK_THROWS_AS(ValidateRoundPlan(plan), ConfigError);
}

TEST_CASE("a policy that always succeeds collects nothing") {
  const GridTask task(Spec(0, 6, 0.1, false), 1);
  CollectionOptions options;
  options.target_successes = 12;
  const CollectionResult r =
      CollectForTask([](Seed) { return true; }, task, options, {1, 1, 0}, {});
  CHECK(r.demos.trajectories.empty());
  CHECK(r.successes_seen == 12);
  CHECK(r.episodes_run == 12);
}

TEST_CASE("coin-flip policy yields the negative-binomial mean") {
  const GridTask task(Spec(0, 6, 0.1, false), 1);
  CollectionOptions options;
  options.target_successes = 20;
  double total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const CollectionResult r =
        CollectForTask(Bernoulli(0.5), task, options, {9, 1, trial % 200}, {});
    CHECK(r.successes_seen == 20);
    CHECK(r.episodes_run == 20 + static_cast<int>(r.demos.trajectories.size()));
    total += static_cast<double>(r.demos.trajectories.size());
  }
  CHECK(total / 200 == doctest::Approx(20.0).epsilon(0.15));
}

TEST_CASE("the cap stops a hopeless task") {
  const GridTask task(Spec(0, 8, 0.2, true), 1);
  CollectionOptions options;
  options.target_successes = 20;
  options.cap = 100;
  const CollectionResult r =
      CollectForTask(Bernoulli(0.01), task, options, {4, 1, 0}, {});
  CHECK(r.demos.trajectories.size() == 100);
  CHECK(r.successes_seen < 20);
  CHECK(r.cap_reached);
}

TEST_CASE("known states are skipped, not recollected") {
  const GridTask task(Spec(0, 6, 0.1, false), 1);
  CollectionOptions options;
  options.target_successes = 1;
  options.cap = 10;
  const SeedScope scope{2, 1, 0};
  std::unordered_set<Seed> existing;
  for (int i = 0; i < 5; ++i) existing.insert(scope.At(SeedPurpose::kCollection, i));
  const CollectionResult r =
      CollectForTask([](Seed) { return false; }, task, options, scope, existing);
  CHECK(r.duplicates_skipped == 5);
  CHECK(r.demos.trajectories.size() == 10);
  CHECK(r.episodes_run == 15);
  for (const Trajectory& t : r.demos.trajectories) CHECK_FALSE(existing.contains(t.init_seed));
}

TEST_CASE("collector refusals do not consume the cap") {
  const GridTask task(Spec(0, 6, 0.1, false), 1);
  CollectionOptions options;
  options.target_successes = 1;
  options.cap = 30;
  options.collector = {0.5, 0};
  const CollectionResult r =
      CollectForTask([](Seed) { return false; }, task, options, {2, 1, 0}, {});
  CHECK(r.demos.trajectories.size() == 30);
  CHECK(r.collector_skips > 0);
  CHECK(r.episodes_run == 30 + r.collector_skips);
}

TEST_CASE("the episode limit guards a loop that can never finish") {
  const GridTask task(Spec(0, 6, 0.1, false), 1);
  CollectionOptions options;
  options.target_successes = 1;
  options.collector = {0.999, 0};
  options.max_episodes = 50;
  const CollectionResult r =
      CollectForTask([](Seed) { return false; }, task, options, {2, 1, 0}, {});
  CHECK(r.episode_limit_reached);
  CHECK(r.episodes_run == 50);
}

TEST_CASE("parallel collection matches sequential collection") {
  const GridTask task(Spec(0, 7, 0.2, false), 1);
  CollectionOptions options;
  options.target_successes = 15;
  options.cap = 40;
  const CollectionResult seq =
      CollectForTask(Bernoulli(0.4), task, options, {5, 2, 0}, {});
  options.threads = 4;
  const CollectionResult par =
      CollectForTask(Bernoulli(0.4), task, options, {5, 2, 0}, {});
  CHECK(par.demos == seq.demos);
  CHECK(par.episodes_run == seq.episodes_run);
  CHECK(par.successes_seen == seq.successes_seen);
}

TEST_CASE("evaluation uses the scope's evaluation seeds") {
  Fixture f;
  const EvaluationReport r =
      EvaluatePolicy(f.policy, f.suite[1], SeedScope{3, 0, 1}, 30);
  REQUIRE(r.episodes.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(r.episodes[i].init_seed == DeriveSeed(3, SeedPurpose::kEvaluation, 0, 1, i));
    CHECK(r.episodes[i].success ==
          RunPolicyEpisode(f.policy, f.suite[1], r.episodes[i].init_seed));
  }
  CHECK(EvaluatePolicy(f.policy, f.suite[1], SeedScope{3, 0, 1}, 30, 3) == r);
}

TEST_CASE("an AdaDemo round collects only on failed states") {
  Fixture f;
  const RoundPlan plan = f.Plan();
  const RoundResult r = RunRoundAdaDemo(f.policy, f.context, plan, f.strategy, f.d0);
  REQUIRE(r.collection.size() == 3);
  for (const GridTask& task : f.suite) {
    const int k = task.task_id();
    const TaskDataset& fresh = r.new_demos.per_task[k];
    CHECK(static_cast<int>(fresh.trajectories.size()) <= plan.per_task_cap);
    CHECK((r.collection[k].successes_seen == plan.target_successes ||
           r.collection[k].cap_reached));
    for (const Trajectory& t : fresh.trajectories) {
      CHECK(t.source_round == 1);
      CHECK_FALSE(RunPolicyEpisode(f.policy, task, t.init_seed));
      CHECK(ReplayVerify(task, t));
    }
    // Merged data keeps every earlier trajectory.
    std::set<Seed> merged;
    for (const Trajectory& t : r.merged.per_task[k].trajectories) merged.insert(t.init_seed);
    for (const Trajectory& t : f.d0.per_task[k].trajectories) CHECK(merged.count(t.init_seed));
    CHECK(r.merged.per_task[k].trajectories.size() ==
          f.d0.per_task[k].trajectories.size() + fresh.trajectories.size());
  }
  CHECK(r.merged.round_index == 1);
  CHECK(r.reports_before.size() == 3);
  CHECK(r.reports_after.size() == 3);
}

TEST_CASE("rounds must follow the dataset's round") {
  Fixture f;
  RoundPlan plan = f.Plan();
  plan.round_index = 2;
  CHECK_THROWS_AS(RunRoundAdaDemo(f.policy, f.context, plan, f.strategy, f.d0),
                  ConfigError);
}

TEST_CASE("a Uniform round collects the quota on every task") {
  Fixture f;
  RoundPlan plan = f.Plan();
  const RoundResult r = RunRoundUniform(f.policy, f.context, plan, f.d0);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.new_demos.per_task[k].trajectories.size() == 6);
    CHECK(r.merged.per_task[k].trajectories.size() == 11);
  }
  for (double w : r.train_weights.weights) CHECK(w == doctest::Approx(1.0 / 3));

  plan.uniform_quota = 0;
  const RoundResult none = RunRoundUniform(f.policy, f.context, plan, f.d0);
  CHECK(none.new_demos.TrajectoryCount() == 0);
  for (int k = 0; k < 3; ++k) CHECK(none.merged.per_task[k] == f.d0.per_task[k]);
}

TEST_CASE("Uniform collection ignores the policy") {
  Fixture f;
  const Policy other =
      Train(f.d0, f.strategy, f.context.learner, kActionCount, 99);
  const RoundResult a = RunRoundUniform(f.policy, f.context, f.Plan(), f.d0);
  const RoundResult b = RunRoundUniform(other, f.context, f.Plan(), f.d0);
  CHECK(a.new_demos == b.new_demos);
}

TEST_CASE("ablation variants") {
  Fixture f;
  const RoundPlan plan = f.Plan();
  const RoundResult ada = RunRoundAdaDemo(f.policy, f.context, plan, f.strategy, f.d0);

  SUBCASE("ABC is AdaDemo") {
    const RoundResult abc = RunRoundAblation(AblationVariant::kABC, f.policy, f.context,
                                             plan, f.strategy, f.d0, std::nullopt);
    CHECK(abc.merged == ada.merged);
    CHECK(abc.policy_after == ada.policy_after);
    CHECK(abc.reports_after == ada.reports_after);
  }
  SUBCASE("AB differs from ABC only in training weights") {
    const RoundResult ab = RunRoundAblation(AblationVariant::kAB, f.policy, f.context,
                                            plan, f.strategy, f.d0, std::nullopt);
    CHECK(ab.new_demos == ada.new_demos);
    CHECK(ab.train_weights.weights != ada.train_weights.weights);
    for (double w : ab.train_weights.weights) CHECK(w == doctest::Approx(1.0 / 3));
  }
  SUBCASE("A copies the reference counts from fresh states") {
    std::vector<int> counts;
    for (const TaskDataset& t : ada.new_demos.per_task)
      counts.push_back(static_cast<int>(t.trajectories.size()));
    const RoundResult a = RunRoundAblation(AblationVariant::kA, f.policy, f.context,
                                           plan, f.strategy, f.d0, counts);
    for (int k = 0; k < 3; ++k) {
      CHECK(static_cast<int>(a.new_demos.per_task[k].trajectories.size()) == counts[k]);
    }
    CHECK_THROWS_AS(RunRoundAblation(AblationVariant::kA, f.policy, f.context, plan,
                                     f.strategy, f.d0, std::nullopt),
                    ConfigError);
  }
}
