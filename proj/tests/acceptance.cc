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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "adademo/envs.h"
#include "adademo/error.h"
#include "adademo/expansion.h"
#include "adademo/harness.h"
#include "adademo/learner.h"

using namespace adademo;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kBudgetTolerance = 1e-12;
constexpr double kYieldTolerance = 0.15;
constexpr double kWeightSumTolerance = 1e-12;
constexpr double kFinalSrSlack = 0.01;
constexpr double kDemoFraction = 2.0 / 3.0;
constexpr double kSpearmanBound = -0.5;
constexpr double kAblationMargin = 0.01;
constexpr double kGradientTolerance = 1e-4;
constexpr double kSpreadBound = 0.20;

int failures = 0;

void Report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << "criterion " << id << " [" << name << "]: "
            << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!pass) ++failures;
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Average ranks, ties share the mean rank.
std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return Pearson(Ranks(x), Ranks(y));
}

// Rows restricted to the given seeds.
std::vector<MetricsRow> ForSeeds(const std::vector<MetricsRow>& rows, Seed first,
                                 int count) {
  std::vector<MetricsRow> out;
  for (const MetricsRow& r : rows) {
    if (r.seed >= first && r.seed < first + static_cast<Seed>(count)) out.push_back(r);
  }
  return out;
}

const MetricsRow* Find(const std::vector<MetricsRow>& rows, Seed seed, int round,
                       int task) {
  for (const MetricsRow& r : rows) {
    if (r.seed == seed && r.round == round && r.task_id == task) return &r;
  }
  return nullptr;
}

void BudgetFormula() {
  double worst = 0;
  bool ok = AllocateBudgetEstimate(0.5, 50) == 50.0;
  for (int e = 1; e <= 200; e += 7) ok = ok && AllocateBudgetEstimate(1.0, e) == 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double sr = i / 100.0;
    for (int e : {1, 5, 20, 50, 100, 200}) {
      const double expected = e * (1.0 - sr) / sr;
      const double err = std::abs(AllocateBudgetEstimate(sr, e) - expected) /
                         std::max(1.0, expected);
      worst = std::max(worst, err);
    }
  }
  ok = ok && worst <= kBudgetTolerance;
  Report(1, "budget formula", ok, Fmt("max relative error %.3g", worst));
}

void NegativeBinomialYield() {
  TaskSpec spec;
  spec.grid_width = spec.grid_height = 6;
  spec.obstacle_density = 0.1;
  spec.horizon = 40;
  spec.layout_seed = 3;
  const GridTask task(spec, 1);
  bool ok = true;
  std::string detail;
  for (double p : {0.2, 0.5, 0.8}) {
    const EpisodeRunner coin = [p](Seed s) { return Rng(s).Uniform() < p; };
    CollectionOptions options;
    options.target_successes = 20;
    double total = 0;
    for (int trial = 0; trial < 200; ++trial) {
      total += static_cast<double>(
          CollectForTask(coin, task, options, {Seed(1000 + trial), 1, 0}, {})
              .demos.trajectories.size());
    }
    const double mean = total / 200;
    const double expected = 20 * (1 - p) / p;
    const bool within = std::abs(mean - expected) <= kYieldTolerance * expected;
    ok = ok && within;
    detail += Fmt("p=%.1f mean %.2f vs %.2f; ", p, mean, expected);
  }
  Report(2, "negative-binomial yield", ok, detail);
}

void CapSemantics() {
  const RunConfig config = DefaultConfig();
  const std::vector<GridTask> suite = BuildSuite(config.suite);
  const GridTask& task = suite.back();
  // A store of one grab transition: the agent never moves.
  TrainingSample grab;
  grab.goal.assign(task.goal_dim(), 0.0);
  grab.observation.assign(kObservationDim, 0.0);
  grab.action = kGrab;
  const Policy stuck = Policy::NearestNeighbor({&grab, 1}, kActionCount, 1, 0);
  const EvaluationReport eval =
      EvaluatePolicy(stuck, task, SeedScope{7, 0, task.task_id()}, 100);
  CollectionOptions options;
  options.target_successes = 20;
  options.cap = 100;
  const CollectionResult r = CollectForTask(
      [&](Seed s) { return RunPolicyEpisode(stuck, task, s); }, task, options,
      SeedScope{7, 1, task.task_id()}, {});
  const bool ok = eval.success_rate < 0.05 && r.demos.trajectories.size() == 100 &&
                  r.successes_seen < options.target_successes && r.cap_reached;
  Report(4, "cap semantics", ok,
         Fmt("SR %.2f, collected %zu, successes %d of %d", eval.success_rate,
             r.demos.trajectories.size(), r.successes_seen,
             options.target_successes));
}

void WeightAlgebra() {
  auto counts = [](std::vector<std::size_t> traj, std::vector<std::size_t> trans) {
    std::vector<TaskCount> c;
    for (std::size_t k = 0; k < traj.size(); ++k)
      c.push_back({static_cast<int>(k), traj[k], trans[k]});
    return c;
  };
  auto near = [](const std::vector<double>& a, std::vector<double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
  };
  bool ok = true;
  ok &= near(ComputeTaskWeights(counts({10, 30}, {100, 100}),
                                {SamplingKind::kUniformOverTrajectory, 0.0}).weights,
             {0.25, 0.75});
  ok &= near(ComputeTaskWeights(counts({3, 9, 27, 81}, {1, 1, 1, 1}),
                                {SamplingKind::kUniformOverTask, 0.0}).weights,
             {0.25, 0.25, 0.25, 0.25});
  ok &= near(ComputeTaskWeights(counts({10, 10}, {100, 300}),
                                {SamplingKind::kUniformOverDataset, 0.0}).weights,
             {0.25, 0.75});
  ok &= near(ComputeTaskWeights(counts({1, 99}, {1, 1}),
                                {SamplingKind::kUniformOverTrajectory, 0.05}).weights,
             {0.05, 0.95});
  double worst_sum = 0;
  bool scale_ok = true;
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng.Below(12));
    std::vector<std::size_t> traj(m), trans(m);
    for (int k = 0; k < m; ++k) {
      traj[k] = 1 + rng.Below(300);
      trans[k] = traj[k] * (1 + rng.Below(40));
    }
    const double floor = rng.Uniform() / m;
    for (SamplingKind kind :
         {SamplingKind::kUniformOverDataset, SamplingKind::kUniformOverTask,
          SamplingKind::kUniformOverTrajectory}) {
      const TaskWeights w = ComputeTaskWeights(counts(traj, trans), {kind, floor});
      const double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    std::vector<std::size_t> scaled = traj, scaled_trans = trans;
    const std::size_t factor = 2 + rng.Below(20);
    for (int k = 0; k < m; ++k) {
      scaled[k] *= factor;
      scaled_trans[k] *= factor;
    }
    const SamplingStrategy s{SamplingKind::kUniformOverTrajectory, floor};
    const TaskWeights a = ComputeTaskWeights(counts(traj, trans), s);
    const TaskWeights b = ComputeTaskWeights(counts(scaled, scaled_trans), s);
    for (int k = 0; k < m; ++k) scale_ok &= std::abs(a.weights[k] - b.weights[k]) <= 1e-12;
  }
  ok = ok && worst_sum <= kWeightSumTolerance && scale_ok;
  Report(5, "sampling-strategy algebra", ok,
         Fmt("hand examples %s, max |sum-1| %.3g, scale invariance %s",
             ok ? "match" : "checked", worst_sum, scale_ok ? "holds" : "broken"));
}

void OracleEquivalence() {
  Rng rng(99);
  int mismatches = 0;
  for (int store = 0; store < 20; ++store) {
    const int goal_dim = 1 + static_cast<int>(rng.Below(4));
    const int obs_dim = 1 + static_cast<int>(rng.Below(8));
    const int n = 1 + static_cast<int>(rng.Below(80));
    std::vector<TrainingSample> samples(n);
    for (TrainingSample& s : samples) {
      s.goal.resize(goal_dim);
      s.observation.resize(obs_dim);
      for (double& v : s.goal) v = std::floor(rng.Uniform() * 4);
      for (double& v : s.observation) v = std::floor(rng.Uniform() * 4);
      s.action = static_cast<ActionId>(rng.Below(kActionCount));
    }
    const Policy p = Policy::NearestNeighbor(samples, kActionCount, n, 0);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> g(goal_dim), o(obs_dim);
      for (double& v : g) v = std::floor(rng.Uniform() * 4);
      for (double& v : o) v = std::floor(rng.Uniform() * 4);
      double best = std::numeric_limits<double>::infinity();
      ActionId expected = -1;
      for (const TrainingSample& s : samples) {
        double d = 0;
        for (int i = 0; i < goal_dim; ++i) d += (s.goal[i] - g[i]) * (s.goal[i] - g[i]);
        for (int i = 0; i < obs_dim; ++i)
          d += (s.observation[i] - o[i]) * (s.observation[i] - o[i]);
        if (d < best) {
          best = d;
          expected = s.action;
        }
      }
      mismatches += p.Act(g, o) != expected;
    }
  }
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int key_dim = 2 + static_cast<int>(rng.Below(6));
    std::vector<TrainingSample> batch(16);
    for (TrainingSample& s : batch) {
      s.goal = {rng.Uniform()};
      s.observation.resize(key_dim - 1);
      for (double& v : s.observation) v = 2 * rng.Uniform() - 1;
      s.action = static_cast<ActionId>(rng.Below(kActionCount));
    }
    std::vector<double> w(kActionCount * (key_dim + 1));
    for (double& v : w) v = 2 * rng.Uniform() - 1;
    std::vector<double> grad;
    SoftmaxCrossEntropy(w, key_dim, kActionCount, batch, &grad);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-5;
      std::vector<double> plus = w, minus = w;
      plus[i] += h;
      minus[i] -= h;
      const double numeric =
          (SoftmaxCrossEntropy(plus, key_dim, kActionCount, batch, nullptr) -
           SoftmaxCrossEntropy(minus, key_dim, kActionCount, batch, nullptr)) /
          (2 * h);
      worst = std::max(worst, std::abs(numeric - grad[i]) /
                                  std::max({std::abs(numeric), std::abs(grad[i]), 1e-8}));
    }
  }
  Report(9, "oracle equivalence", mismatches == 0 && worst <= kGradientTolerance,
         Fmt("nearest-neighbor mismatches %d of 200, max gradient rel. error %.3g",
             mismatches, worst));
}

struct CurveSummary {
  std::vector<CurvePoint> points;
  const CurvePoint& final() const { return points.back(); }
};

CurveSummary Curve(const std::vector<MetricsRow>& rows) {
  return {ComputeCurve(rows)};
}

std::string CurveText(const CurveSummary& c) {
  std::string s;
  for (const CurvePoint& p : c.points) s += Fmt("%.1f/%.3f ", p.cumulative_demos_mean, p.mean_sr);
  return s;
}

void Determinism(const std::string& config_path) {
  const fs::path root = fs::temp_directory_path() / "adademo_acceptance";
  fs::remove_all(root);
  auto cli = [](std::vector<std::string> args) {
    std::vector<const char*> argv{"adademo"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) std::cerr << err.str();
    return code;
  };
  const std::string a = (root / "a").string(), b = (root / "b").string(),
                    c = (root / "c").string();
  bool ok = cli({"run", config_path, "--out", a, "--seed", "7"}) == 0 &&
            cli({"run", config_path, "--out", b, "--seed", "7"}) == 0;
  const bool same = ok && ReadFile(fs::path(a) / "metrics.csv") ==
                              ReadFile(fs::path(b) / "metrics.csv") &&
                    ReadFile(fs::path(a) / "curve.csv") ==
                        ReadFile(fs::path(b) / "curve.csv");
  const std::string checkpoint =
      (fs::path(a) / "checkpoints" / "adademo" / "seed_8" / "round_1").string();
  const bool resumed =
      ok && cli({"run", config_path, "--out", c, "--seed", "7", "--resume", checkpoint}) == 0 &&
      ReadFile(fs::path(c) / "metrics.csv") == ReadFile(fs::path(a) / "metrics.csv") &&
      ReadFile(fs::path(c) / "curve.csv") == ReadFile(fs::path(a) / "curve.csv");
  Report(10, "determinism", same && resumed,
         Fmt("repeat run identical: %s, resumed from seed 8 round 1 identical: %s",
             same ? "yes" : "no", resumed ? "yes" : "no"));
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_path =
      argc > 1 ? argv[1] : std::string(ADADEMO_SOURCE_DIR) + "/configs/default.json";
  try {
    const RunConfig base = LoadConfig(config_path);
    const Seed seed0 = base.master_seed;

    BudgetFormula();
    NegativeBinomialYield();

    // AdaDemo over ten seeds; the first three also serve the data-efficiency
    // comparison and the first five the ablation table.
    RunConfig ada = base;
    ada.method = Method::kAdaDemo;
    ada.num_seeds = 10;
    long long collected = 0, gate_violations = 0, replay_failures = 0;
    RunOptions gate;
    gate.on_round = [&](const RoundObservation& o) {
      for (const GridTask& task : *o.suite) {
        for (const Trajectory& t :
             o.result->new_demos.per_task[task.task_id()].trajectories) {
          ++collected;
          gate_violations += RunPolicyEpisode(*o.policy_before, task, t.init_seed);
          replay_failures += !ReplayVerify(task, t);
        }
      }
    };
    const std::vector<MetricsRow> ada_rows = RunExperiment(ada, gate);
    Report(3, "failure-gating soundness",
           collected > 0 && gate_violations == 0 && replay_failures == 0,
           Fmt("%lld trajectories over 10 seeds, %lld solved by the pre-round "
               "policy, %lld failed replay",
               collected, gate_violations, replay_failures));

    CapSemantics();
    WeightAlgebra();

    // Data efficiency.
    RunConfig uni = base;
    uni.method = Method::kUniform;
    uni.num_seeds = 3;
    const CurveSummary ada3 = Curve(ForSeeds(ada_rows, seed0, 3));
    const CurveSummary uni3 = Curve(RunExperiment(uni, {}));
    const double target = uni3.final().mean_sr;
    const double budget = kDemoFraction * uni3.final().cumulative_demos_mean;
    bool reached = false;
    for (const CurvePoint& p : ada3.points) {
      reached |= p.mean_sr >= target && p.cumulative_demos_mean <= budget;
    }
    const bool final_ok = ada3.final().mean_sr >= target - kFinalSrSlack &&
                          ada3.final().cumulative_demos_mean <=
                              uni3.final().cumulative_demos_mean;
    Report(6, "data efficiency", final_ok && reached,
           Fmt("adademo %s| uniform %s| reach %.3f within %.1f demos: %s",
               CurveText(ada3).c_str(), CurveText(uni3).c_str(), target, budget,
               reached ? "yes" : "no"));

    // Allocation monotonicity, pooled over seeds and tasks.
    std::vector<double> sr0, demos1;
    double per_seed_sum = 0;
    for (int s = 0; s < 10; ++s) {
      std::vector<double> x, y;
      for (int k = 0; k < static_cast<int>(base.suite.size()); ++k) {
        x.push_back(Find(ada_rows, seed0 + s, 0, k)->success_rate);
        y.push_back(static_cast<double>(Find(ada_rows, seed0 + s, 1, k)->new_demos));
      }
      per_seed_sum += Spearman(x, y);
      sr0.insert(sr0.end(), x.begin(), x.end());
      demos1.insert(demos1.end(), y.begin(), y.end());
    }
    const double rho = Spearman(sr0, demos1);
    Report(7, "allocation monotonicity", rho <= kSpearmanBound,
           Fmt("pooled Spearman %.3f over %zu (seed, task) pairs, mean per-seed %.3f",
               rho, sr0.size(), per_seed_sum / 10));

    // Ablations at matched demonstration counts.
    const std::vector<MetricsRow> abc_rows = ForSeeds(ada_rows, seed0, 5);
    RunConfig a = base, ab = base, matched = base;
    a.method = Method::kAblationA;
    ab.method = Method::kAblationAB;
    matched.method = Method::kUniform;
    a.num_seeds = ab.num_seeds = matched.num_seeds = 5;
    const double tasks = static_cast<double>(base.suite.size());
    for (RoundPlan& plan : matched.rounds) {
      double total = 0;
      for (const MetricsRow& r : abc_rows) {
        if (r.round == plan.round_index && r.task_id == kAggregateTask) total += r.new_demos;
      }
      plan.uniform_quota = static_cast<int>(std::lround(total / 5 / tasks));
    }
    const CurveSummary c_abc = Curve(abc_rows);
    const CurveSummary c_a = Curve(RunExperiment(a, {}));
    const CurveSummary c_ab = Curve(RunExperiment(ab, {}));
    const CurveSummary c_u = Curve(RunExperiment(matched, {}));
    const double sr_abc = c_abc.final().mean_sr;
    Report(8, "ablation ordering",
           sr_abc >= c_u.final().mean_sr + kAblationMargin && sr_abc >= c_a.final().mean_sr,
           Fmt("final SR uniform %.3f (%.1f demos), A %.3f (%.1f), AB %.3f (%.1f), "
               "ABC %.3f (%.1f); A %s AB",
               c_u.final().mean_sr, c_u.final().cumulative_demos_mean,
               c_a.final().mean_sr, c_a.final().cumulative_demos_mean,
               c_ab.final().mean_sr, c_ab.final().cumulative_demos_mean, sr_abc,
               c_abc.final().cumulative_demos_mean,
               c_a.final().mean_sr <= c_ab.final().mean_sr ? "<=" : ">"));

    OracleEquivalence();
    Determinism(config_path);

    // Round-0 difficulty spread of the default suite.
    double lo = 1, hi = 0;
    for (int k = 0; k < static_cast<int>(base.suite.size()); ++k) {
      double sr = 0;
      for (int s = 0; s < 3; ++s) sr += Find(ada_rows, seed0 + s, 0, k)->success_rate / 3;
      lo = std::min(lo, sr);
      hi = std::max(hi, sr);
    }
    const bool spread_ok = hi - lo > kSpreadBound;
    std::cout << "suite difficulty spread: " << (spread_ok ? "PASS" : "FAIL")
              << Fmt("  round-0 SR from %.2f to %.2f", lo, hi) << std::endl;
    if (!spread_ok) ++failures;
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "all criteria passed" : "some criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
