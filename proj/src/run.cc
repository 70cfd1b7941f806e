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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include "adademo/error.h"
#include "adademo/harness.h"
#include "adademo/parallel.h"

namespace adademo {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr char kCheckpointFormat[] = "adademo-checkpoint";
constexpr int kCheckpointVersion = 1;

SamplingStrategy TrainingStrategy(const RunConfig& config, Method method) {
  if (method == Method::kAdaDemo) return config.strategy;
  return {SamplingKind::kUniformOverTask, config.strategy.min_task_weight};
}

// Config fields that must agree between a checkpoint and the resuming run.
ordered_json ResumeFingerprint(const RunConfig& config) {
  ordered_json j = ConfigToJson(config);
  j.erase("master_seed");
  j.erase("num_seeds");
  j.erase("threads");
  j.erase("method");
  return j;
}

std::vector<MetricsRow> RoundRows(Method method, Seed seed, int round,
                                  const std::vector<EvaluationReport>& reports,
                                  const DemoDataset& new_demos,
                                  const DemoDataset& merged) {
  std::vector<MetricsRow> rows;
  MetricsRow total{MethodName(method), seed, round, kAggregateTask};
  double variance = 0.0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    MetricsRow row{MethodName(method), seed, round, static_cast<int>(k)};
    row.success_rate = reports[k].success_rate;
    row.sr_stderr = reports[k].StandardError();
    row.new_demos =
        static_cast<long long>(new_demos.per_task[k].trajectories.size());
    row.cumulative_demos =
        static_cast<long long>(merged.per_task[k].trajectories.size());
    total.success_rate += row.success_rate;
    variance += row.sr_stderr * row.sr_stderr;
    total.new_demos += row.new_demos;
    total.cumulative_demos += row.cumulative_demos;
    rows.push_back(row);
  }
  const double m = static_cast<double>(reports.size());
  total.success_rate /= m;
  total.sr_stderr = std::sqrt(variance) / m;
  rows.push_back(total);
  return rows;
}

ordered_json ReportsToJson(const std::vector<EvaluationReport>& reports) {
  ordered_json j = ordered_json::array();
  for (const EvaluationReport& r : reports) {
    ordered_json episodes = ordered_json::array();
    for (const EpisodeOutcome& e : r.episodes) {
      episodes.push_back(ordered_json::array({e.init_seed, e.success}));
    }
    j.push_back({{"task_id", r.task_id},
                 {"success_rate", r.success_rate},
                 {"episodes", std::move(episodes)}});
  }
  return j;
}

std::vector<EvaluationReport> ReportsFromJson(const nlohmann::json& j) {
  std::vector<EvaluationReport> reports;
  for (const auto& r : j) {
    std::vector<EpisodeOutcome> episodes;
    for (const auto& e : r.at("episodes")) {
      episodes.push_back({e.at(0).get<Seed>(), e.at(1).get<bool>()});
    }
    reports.push_back(EvaluationReport::FromEpisodes(r.at("task_id").get<int>(),
                                                     std::move(episodes)));
  }
  return reports;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Checkpoint {
  Method method;
  Seed seed;
  int round;
  int capacity;
  DemoDataset dataset;
  Policy policy;
  std::vector<EvaluationReport> reports;
  std::vector<MetricsRow> rows;
};

fs::path CheckpointPath(const std::string& root, Method method, Seed seed,
                        int round) {
  return fs::path(root) / MethodName(method) /
         ("seed_" + std::to_string(seed)) / ("round_" + std::to_string(round));
}

// Written to a sibling temp directory and renamed into place, so a crash
// never leaves a partial checkpoint under the final name.
void WriteCheckpoint(const std::string& root, const RunConfig& config,
                     const Checkpoint& cp) {
  const fs::path final_path = CheckpointPath(root, cp.method, cp.seed, cp.round);
  fs::path tmp = final_path;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  SaveDataset(cp.dataset, SchemaFor(config), (tmp / "dataset.jsonl").string());
  {
    std::ofstream out(tmp / "policy.txt", std::ios::binary);
    cp.policy.Save(out);
    if (!out) throw Error("cannot write policy checkpoint");
  }
  WriteText(tmp / "report.json", ReportsToJson(cp.reports).dump() + "\n");
  WriteText(tmp / "rows.csv", MetricsCsv(cp.rows));
  ordered_json meta;
  meta["format"] = kCheckpointFormat;
  meta["version"] = kCheckpointVersion;
  meta["method"] = MethodName(cp.method);
  meta["seed"] = cp.seed;
  meta["round"] = cp.round;
  meta["capacity"] = cp.capacity;
  meta["config"] = ResumeFingerprint(config);
  WriteText(tmp / "meta.json", meta.dump(2) + "\n");

  fs::remove_all(final_path);
  fs::rename(tmp, final_path);
}

struct CheckpointMeta {
  Method method;
  Seed seed;
  int round;
  int capacity;
  nlohmann::json config;
};

CheckpointMeta ReadCheckpointMeta(const fs::path& dir) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadText(dir / "meta.json"));
    if (meta.at("format").get<std::string>() != kCheckpointFormat ||
        meta.at("version").get<int>() != kCheckpointVersion) {
      throw ConfigError(dir.string() + " is not a checkpoint");
    }
    return {ParseMethod(meta.at("method").get<std::string>()),
            meta.at("seed").get<Seed>(), meta.at("round").get<int>(),
            meta.at("capacity").get<int>(), meta.at("config")};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(dir.string() + ": bad checkpoint metadata: " + e.what());
  }
}

Checkpoint ReadCheckpoint(const fs::path& dir, const RunConfig& config) {
  const CheckpointMeta meta = ReadCheckpointMeta(dir);
  if (nlohmann::json(ResumeFingerprint(config)) != meta.config) {
    throw ConfigError(dir.string() +
                      ": checkpoint was written by a different configuration");
  }
  Checkpoint cp{meta.method, meta.seed, meta.round, meta.capacity, {}, {}, {}, {}};
  cp.dataset =
      LoadDataset((dir / "dataset.jsonl").string(), SchemaFor(config));
  {
    std::ifstream in(dir / "policy.txt", std::ios::binary);
    if (!in) throw Error("missing policy in " + dir.string());
    cp.policy = Policy::Load(in);
  }
  cp.reports = ReportsFromJson(nlohmann::json::parse(ReadText(dir / "report.json")));
  cp.rows = ParseMetricsCsv(ReadText(dir / "rows.csv"));
  return cp;
}

int ResolveCapacity(const RunConfig& config, const DemoDataset& initial) {
  if (config.learner.capacity > 0) return config.learner.capacity;
  const double c = config.learner.capacity_fraction *
                   static_cast<double>(initial.TransitionCount());
  return std::max(1, static_cast<int>(std::lround(c)));
}

// Per-round, per-task new demonstration counts of the AdaDemo run with the
// same seed; the allocation that ablation A copies.
std::map<int, std::vector<int>> ReferenceCounts(const RunConfig& config,
                                                Seed seed) {
  RunConfig reference = config;
  reference.method = Method::kAdaDemo;
  std::map<int, std::vector<int>> counts;
  for (const MetricsRow& row : RunSeed(reference, seed, RunOptions{})) {
    if (row.round == 0 || row.task_id == kAggregateTask) continue;
    std::vector<int>& v = counts[row.round];
    v.resize(config.suite.size());
    v[row.task_id] = static_cast<int>(row.new_demos);
  }
  return counts;
}

}  // namespace

DemoDataset BootstrapInitialDataset(const RunConfig& config, Seed seed,
                                    std::span<const GridTask> suite) {
  DemoDataset d0 = DemoDataset::Empty(static_cast<int>(suite.size()), 0);
  for (const GridTask& task : suite) {
    const int k = task.task_id();
    d0.per_task[k] =
        CollectFresh(task, config.initial_demos_per_task, config.collector,
                     SeedScope{seed, 0, k}, {}, SeedPurpose::kBootstrap);
  }
  return d0;
}

std::vector<MetricsRow> RunSeed(const RunConfig& config, Seed seed,
                                const RunOptions& options) {
  ValidateConfig(config);
  const std::vector<GridTask> suite = BuildSuite(config.suite);
  const Method method = config.method;
  const SamplingStrategy strategy = TrainingStrategy(config, method);
  const int first_eval =
      config.rounds.empty() ? 100 : config.rounds.front().eval_report_episodes;

  ExpansionContext context;
  context.suite = suite;
  context.collector = config.collector;
  context.master_seed = seed;
  context.threads = ResolveThreads(config.threads);
  context.max_episodes_per_task = config.max_episodes_per_task;
  context.learner.kind = config.learner.kind;
  context.learner.sgd_steps = config.learner.sgd_steps;
  context.learner.learning_rate = config.learner.learning_rate;
  context.learner.batch_size = config.learner.batch_size;
  if (config.learner.capacity == 0 &&
      config.learner.capacity_basis == CapacityBasis::kCurrent) {
    context.learner.capacity_fraction = config.learner.capacity_fraction;
  }

  std::map<int, std::vector<int>> reference;
  if (method == Method::kAblationA) reference = ReferenceCounts(config, seed);

  DemoDataset dataset;
  Policy policy;
  std::vector<EvaluationReport> reports;
  std::vector<MetricsRow> rows;
  int start_round = 0;

  if (options.resume_from) {
    Checkpoint cp = ReadCheckpoint(*options.resume_from, config);
    if (cp.method != method || cp.seed != seed) {
      throw ConfigError("checkpoint belongs to method " +
                        std::string(MethodName(cp.method)) + " seed " +
                        std::to_string(cp.seed));
    }
    context.learner.capacity = cp.capacity;
    dataset = std::move(cp.dataset);
    policy = std::move(cp.policy);
    reports = std::move(cp.reports);
    rows = std::move(cp.rows);
    start_round = cp.round;
  } else {
    dataset = BootstrapInitialDataset(config, seed, suite);
    context.learner.capacity = ResolveCapacity(config, dataset);
    policy = Train(dataset, strategy, context.learner, kActionCount,
                   DeriveSeed(seed, SeedPurpose::kTraining, 0, 0, 0));
    reports = EvaluateSuite(policy, context, 0, first_eval);
    rows = RoundRows(method, seed, 0, reports,
                     DemoDataset::Empty(dataset.num_tasks(), 0), dataset);
    if (!options.checkpoint_dir.empty()) {
      WriteCheckpoint(options.checkpoint_dir, config,
                      {method, seed, 0, context.learner.capacity, dataset,
                       policy, reports, rows});
    }
  }
  if (options.log) {
    *options.log << MethodName(method) << " seed " << seed << " round "
                 << start_round << " mean SR " << rows.back().success_rate
                 << " demos " << rows.back().cumulative_demos << std::endl;
  }

  for (const RoundPlan& plan : config.rounds) {
    if (plan.round_index <= start_round) continue;
    RoundResult result;
    switch (method) {
      case Method::kAdaDemo:
        result = RunRoundAdaDemo(policy, context, plan, strategy, dataset,
                                 &reports);
        break;
      case Method::kUniform:
        result = RunRoundUniform(policy, context, plan, dataset, &reports);
        break;
      case Method::kAblationA:
        result = RunRoundAblation(AblationVariant::kA, policy, context, plan,
                                  config.strategy, dataset,
                                  reference.at(plan.round_index), &reports);
        break;
      case Method::kAblationAB:
        result = RunRoundAblation(AblationVariant::kAB, policy, context, plan,
                                  config.strategy, dataset, std::nullopt,
                                  &reports);
        break;
    }
    if (options.on_round) {
      options.on_round({method, seed, &suite, &plan, &policy, &result});
    }
    const std::vector<MetricsRow> round_rows =
        RoundRows(method, seed, plan.round_index, result.reports_after,
                  result.new_demos, result.merged);
    rows.insert(rows.end(), round_rows.begin(), round_rows.end());
    dataset = std::move(result.merged);
    policy = std::move(result.policy_after);
    reports = std::move(result.reports_after);
    if (!options.checkpoint_dir.empty()) {
      WriteCheckpoint(options.checkpoint_dir, config,
                      {method, seed, plan.round_index, context.learner.capacity,
                       dataset, policy, reports, rows});
    }
    if (options.log) {
      *options.log << MethodName(method) << " seed " << seed << " round "
                   << plan.round_index << " mean SR "
                   << rows.back().success_rate << " demos "
                   << rows.back().cumulative_demos << std::endl;
    }
  }
  return rows;
}

std::vector<MetricsRow> RunExperiment(const RunConfig& config,
                                      const RunOptions& options) {
  ValidateConfig(config);
  std::optional<CheckpointMeta> resume;
  if (options.resume_from) {
    resume = ReadCheckpointMeta(*options.resume_from);
    const Seed last = config.master_seed + config.num_seeds - 1;
    if (resume->method != config.method || resume->seed < config.master_seed ||
        resume->seed > last) {
      throw ConfigError("checkpoint " + *options.resume_from +
                        " is not part of this run's method and seed range");
    }
  }
  std::vector<MetricsRow> rows;
  for (int s = 0; s < config.num_seeds; ++s) {
    const Seed seed = config.master_seed + static_cast<Seed>(s);
    RunOptions per_seed = options;
    if (!resume || resume->seed != seed) per_seed.resume_from.reset();
    std::vector<MetricsRow> seed_rows = RunSeed(config, seed, per_seed);
    rows.insert(rows.end(), seed_rows.begin(), seed_rows.end());
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MetricsRow& a, const MetricsRow& b) {
                     auto task_key = [](int t) {
                       return t == kAggregateTask ? 1 << 30 : t;
                     };
                     return std::tuple(a.method, a.seed, a.round,
                                       task_key(a.task_id)) <
                            std::tuple(b.method, b.seed, b.round,
                                       task_key(b.task_id));
                   });
  return rows;
}

}  // namespace adademo
