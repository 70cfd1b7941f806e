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

#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "adademo/error.h"
#include "adademo/harness.h"

namespace adademo {
namespace {

constexpr char kOutDirEnv[] = "ADADEMO_OUT_DIR";
constexpr char kDefaultOutDir[] = "adademo_out";
constexpr int kValidateResets = 1000;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int Validate(const std::string& path, std::ostream& out) {
  const RunConfig config = LoadConfig(path);
  ValidateConfig(config);
  const std::vector<GridTask> suite = BuildSuite(config.suite);
  const CollectorSpec perfect;
  for (const GridTask& task : suite) {
    for (int i = 0; i < kValidateResets; ++i) {
      const Seed s = DeriveSeed(config.master_seed, SeedPurpose::kBootstrap, 0,
                                task.task_id(), static_cast<std::uint64_t>(i));
      const std::optional<Trajectory> t = OracleCollect(task, s, perfect, 0);
      if (!t || !ReplayVerify(task, *t)) {
        throw ConfigError("task " + std::to_string(task.task_id()) +
                          ": oracle failed from init_seed " +
                          std::to_string(s));
      }
    }
    const TaskSpec& spec = task.spec();
    out << "task " << spec.task_id << ": " << spec.grid_width << "x"
        << spec.grid_height << " density " << spec.obstacle_density
        << (spec.requires_key ? " key" : "") << ", " << task.ReachableCellCount()
        << " reachable cells, worst-case solution " << task.MaxSolutionLength()
        << " <= horizon " << spec.horizon << "\n";
  }
  out << "ok: " << suite.size() << " tasks, " << config.rounds.size()
      << " rounds, " << kValidateResets << " oracle resets per task\n";
  return 0;
}

int Run(const std::string& config_path, std::string out_dir,
        std::optional<Seed> seed, std::optional<std::string> resume,
        std::optional<std::string> method, std::optional<int> threads,
        std::optional<int> num_seeds, std::ostream& out, std::ostream& err) {
  RunConfig config = LoadConfig(config_path);
  if (seed) config.master_seed = *seed;
  if (method) config.method = ParseMethod(*method);
  if (threads) config.threads = *threads;
  if (num_seeds) config.num_seeds = *num_seeds;
  ValidateConfig(config);
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    out_dir = env && *env ? env : kDefaultOutDir;
  }
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream cfg(std::filesystem::path(out_dir) / "config.json");
    cfg << ConfigToJson(config).dump(2) << "\n";
  }
  RunOptions options;
  options.checkpoint_dir = (std::filesystem::path(out_dir) / "checkpoints").string();
  options.resume_from = resume;
  options.log = &err;
  const std::vector<MetricsRow> rows = RunExperiment(config, options);
  EmitReport(rows, out_dir);
  for (const CurvePoint& p : ComputeCurve(rows)) {
    out << p.method << " round " << p.round << ": mean SR " << std::fixed
        << std::setprecision(4) << p.mean_sr << " +/- " << p.sr_stderr
        << ", demos/task " << std::setprecision(1) << p.cumulative_demos_mean
        << "\n";
    out.unsetf(std::ios::fixed);
  }
  out << "wrote " << out_dir << "/metrics.csv and curve.csv\n";
  return 0;
}

std::vector<CurvePoint> LoadCurve(const std::string& dir) {
  const std::vector<CurvePoint> curve = ComputeCurve(ParseMetricsCsv(
      ReadFile((std::filesystem::path(dir) / "metrics.csv").string())));
  for (const CurvePoint& p : curve) {
    if (p.method != curve.front().method) {
      throw UsageError(dir + " holds more than one method");
    }
  }
  return curve;
}

int Compare(const std::string& dir_a, const std::string& dir_b,
            std::ostream& out) {
  const std::vector<CurvePoint> a = LoadCurve(dir_a);
  const std::vector<CurvePoint> b = LoadCurve(dir_b);
  std::map<int, const CurvePoint*> by_round;
  for (const CurvePoint& p : b) by_round[p.round] = &p;
  out << "A=" << (a.empty() ? "" : a.front().method) << " (" << dir_a
      << ")  B=" << (b.empty() ? "" : b.front().method) << " (" << dir_b
      << ")\n";
  out << "round,sr_a,sr_b,sr_delta,demos_a,demos_b,demos_delta\n";
  out << std::fixed;
  for (const CurvePoint& pa : a) {
    const auto it = by_round.find(pa.round);
    if (it == by_round.end()) continue;
    const CurvePoint& pb = *it->second;
    out << pa.round << "," << std::setprecision(4) << pa.mean_sr << ","
        << pb.mean_sr << "," << pb.mean_sr - pa.mean_sr << ","
        << std::setprecision(2) << pa.cumulative_demos_mean << ","
        << pb.cumulative_demos_mean << ","
        << pb.cumulative_demos_mean - pa.cumulative_demos_mean << "\n";
  }
  out.unsetf(std::ios::fixed);
  return 0;
}

int DemoDump(const std::string& path, int limit, std::ostream& out) {
  const LoadedDataset loaded = LoadDataset(path);
  const DatasetSchema& s = loaded.schema;
  out << "tasks " << s.num_tasks << ", goal_dim " << s.goal_dim
      << ", obs_dim " << s.obs_dim << ", actions " << s.action_count
      << ", round " << loaded.dataset.round_index << ", trajectories "
      << loaded.dataset.TrajectoryCount() << "\n";
  static constexpr char kActionGlyph[] = "UDLRG";
  for (const TaskDataset& task : loaded.dataset.per_task) {
    out << "task " << task.task_id << ": " << task.trajectories.size()
        << " trajectories\n";
    int shown = 0;
    for (const Trajectory& t : task.trajectories) {
      if (limit >= 0 && shown++ >= limit) {
        out << "  ...\n";
        break;
      }
      out << "  round " << t.source_round << " init_seed " << t.init_seed
          << " steps " << t.transitions.size() << " actions ";
      for (const Transition& tr : t.transitions) {
        out << (tr.action >= 0 && tr.action < 5 ? kActionGlyph[tr.action]
                                                : '?');
      }
      out << "\n";
    }
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Adaptive demonstration-dataset expansion on a gridworld suite"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<Seed> seed;
  std::optional<std::string> resume;
  std::optional<std::string> method;
  std::optional<int> threads;
  std::optional<int> num_seeds;
  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("config", config_path, "Run config (JSON)")->required();
  run->add_option("--out", out_dir,
                  std::string("Output directory (default $") + kOutDirEnv +
                      " or " + kDefaultOutDir + ")");
  run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--resume", resume, "Round checkpoint directory");
  run->add_option("--method", method,
                  "Override method: adademo, uniform, ablation_A, ablation_AB");
  run->add_option("--threads", threads, "Worker threads (0 = all)");
  run->add_option("--num-seeds", num_seeds, "Override num_seeds");

  std::string dir_a;
  std::string dir_b;
  CLI::App* compare = app.add_subcommand("compare", "Per-round SR/demo deltas");
  compare->add_option("dir_a", dir_a)->required();
  compare->add_option("dir_b", dir_b)->required();

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a run config");
  validate->add_option("config", validate_path)->required();

  std::string dataset_path;
  int limit = -1;
  CLI::App* dump = app.add_subcommand("demo-dump", "List a dataset file");
  dump->add_option("dataset", dataset_path)->required();
  dump->add_option("--limit", limit, "Trajectories shown per task");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) {
      return Run(config_path, out_dir, seed, resume, method, threads,
                 num_seeds, out, err);
    }
    if (*compare) return Compare(dir_a, dir_b, out);
    if (*validate) return Validate(validate_path, out);
    if (*dump) return DemoDump(dataset_path, limit, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace adademo
