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

#include "adademo/learner.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "adademo/error.h"

namespace adademo {

const char* SamplingKindName(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::kUniformOverDataset:
      return "uniform_over_dataset";
    case SamplingKind::kUniformOverTask:
      return "uniform_over_task";
    case SamplingKind::kUniformOverTrajectory:
      return "uniform_over_trajectory";
  }
  return "?";
}

SamplingKind ParseSamplingKind(const std::string& name) {
  for (SamplingKind k :
       {SamplingKind::kUniformOverDataset, SamplingKind::kUniformOverTask,
        SamplingKind::kUniformOverTrajectory}) {
    if (name == SamplingKindName(k)) return k;
  }
  throw ConfigError("unknown sampling strategy '" + name + "'");
}

const char* PolicyKindName(PolicyKind kind) {
  return kind == PolicyKind::kNearestNeighbor ? "nearest_neighbor"
                                              : "linear_softmax";
}

PolicyKind ParsePolicyKind(const std::string& name) {
  if (name == "nearest_neighbor") return PolicyKind::kNearestNeighbor;
  if (name == "linear_softmax") return PolicyKind::kLinearSoftmax;
  throw ConfigError("unknown policy kind '" + name + "'");
}

TaskWeights ComputeTaskWeights(std::span<const TaskCount> counts,
                               const SamplingStrategy& strategy) {
  const std::size_t m = counts.size();
  if (m == 0) throw EmptyDatasetError("no tasks");
  const double floor = strategy.min_task_weight;
  if (!(floor >= 0.0) || floor * static_cast<double>(m) > 1.0 + 1e-12) {
    throw ConfigError("min_task_weight must be in [0, 1/M]");
  }

  std::vector<double> raw(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    if (counts[k].trajectories == 0) continue;
    switch (strategy.kind) {
      case SamplingKind::kUniformOverDataset:
        raw[k] = static_cast<double>(counts[k].transitions);
        break;
      case SamplingKind::kUniformOverTask:
        raw[k] = 1.0;
        break;
      case SamplingKind::kUniformOverTrajectory:
        raw[k] = static_cast<double>(counts[k].trajectories);
        break;
    }
  }
  double raw_total = 0.0;
  for (double r : raw) raw_total += r;
  if (raw_total <= 0.0) throw EmptyDatasetError("every task is empty");

  TaskWeights result;
  std::vector<double>& w = result.weights;
  w.assign(m, 0.0);
  std::vector<bool> floored(m, false);
  while (true) {
    double free_raw = 0.0;
    std::size_t num_floored = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (floored[k]) {
        ++num_floored;
      } else {
        free_raw += raw[k];
      }
    }
    const double free_mass = 1.0 - static_cast<double>(num_floored) * floor;
    bool changed = false;
    for (std::size_t k = 0; k < m; ++k) {
      if (floored[k]) {
        w[k] = floor;
      } else if (raw[k] > 0.0) {
        w[k] = free_mass * raw[k] / free_raw;
        if (w[k] < floor) {
          floored[k] = true;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return result;
}

std::vector<TrainingSample> DrawTrainingSet(const DemoDataset& dataset,
                                            const TaskWeights& weights,
                                            int budget, Seed rng_seed) {
  if (budget < 1) throw ConfigError("training budget must be >= 1");
  if (dataset.TrajectoryCount() == 0) {
    throw EmptyDatasetError("cannot draw from an empty dataset");
  }
  const std::size_t m = dataset.per_task.size();
  if (weights.weights.size() != m) {
    throw StructuralError("weight vector does not match task count");
  }
  std::vector<double> cumulative(m);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < m; ++k) {
    acc += weights.weights[k];
    cumulative[k] = acc;
    if (weights.weights[k] > 0.0) last_positive = k;
  }

  Rng rng(rng_seed);
  std::vector<TrainingSample> samples;
  samples.reserve(budget);
  for (int i = 0; i < budget; ++i) {
    const double u = rng.Uniform() * acc;
    std::size_t k = last_positive;
    for (std::size_t j = 0; j < m; ++j) {
      if (weights.weights[j] > 0.0 && u < cumulative[j]) {
        k = j;
        break;
      }
    }
    const TaskDataset& task = dataset.per_task[k];
    if (task.trajectories.empty()) {
      throw std::logic_error("positive sampling weight on empty task " +
                             std::to_string(k));
    }
    const Trajectory& t = task.trajectories[rng.Below(task.trajectories.size())];
    const Transition& tr = t.transitions[rng.Below(t.transitions.size())];
    samples.push_back({task.task_id, t.goal, tr.observation, tr.action});
  }
  return samples;
}

Policy Policy::NearestNeighbor(std::span<const TrainingSample> samples,
                               int action_count, int capacity,
                               Seed train_seed) {
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  if (samples.empty()) throw EmptyDatasetError("no samples to store");
  Policy p;
  p.kind_ = PolicyKind::kNearestNeighbor;
  p.capacity_ = capacity;
  p.train_seed_ = train_seed;
  p.action_count_ = action_count;
  p.key_dim_ = static_cast<int>(samples.front().goal.size() +
                                samples.front().observation.size());
  const std::size_t n =
      std::min(samples.size(), static_cast<std::size_t>(capacity));
  p.stored_keys_.reserve(n * p.key_dim_);
  for (std::size_t i = 0; i < n; ++i) {
    const TrainingSample& s = samples[i];
    if (static_cast<int>(s.goal.size() + s.observation.size()) != p.key_dim_) {
      throw SchemaError("inconsistent sample dimensions");
    }
    p.stored_keys_.insert(p.stored_keys_.end(), s.goal.begin(), s.goal.end());
    p.stored_keys_.insert(p.stored_keys_.end(), s.observation.begin(),
                          s.observation.end());
    p.stored_actions_.push_back(s.action);
    p.stored_tasks_.push_back(s.task_id);
    if (s.action < 0 || s.action >= action_count) {
      throw SchemaError("sample action out of range");
    }
  }
  return p;
}

Policy Policy::LinearSoftmax(int key_dim, int action_count,
                             std::vector<double> weights, int capacity,
                             Seed train_seed) {
  if (weights.size() !=
      static_cast<std::size_t>(action_count) * (key_dim + 1)) {
    throw SchemaError("softmax weight matrix has the wrong size");
  }
  Policy p;
  p.kind_ = PolicyKind::kLinearSoftmax;
  p.capacity_ = capacity;
  p.train_seed_ = train_seed;
  p.key_dim_ = key_dim;
  p.action_count_ = action_count;
  p.weights_ = std::move(weights);
  return p;
}

ActionId Policy::Act(std::span<const double> goal,
                     std::span<const double> observation) const {
  if (static_cast<int>(goal.size() + observation.size()) != key_dim_) {
    throw SchemaError("query has " +
                      std::to_string(goal.size() + observation.size()) +
                      " features, policy expects " + std::to_string(key_dim_));
  }
  if (kind_ == PolicyKind::kNearestNeighbor) {
    const std::size_t gd = goal.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    const double* key = stored_keys_.data();
    for (std::size_t i = 0; i < stored_actions_.size(); ++i, key += key_dim_) {
      double d = 0.0;
      for (std::size_t j = 0; j < gd; ++j) {
        const double diff = key[j] - goal[j];
        d += diff * diff;
      }
      for (std::size_t j = 0; j < observation.size(); ++j) {
        const double diff = key[gd + j] - observation[j];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_index = i;
      }
    }
    return stored_actions_[best_index];
  }

  const int cols = key_dim_ + 1;
  ActionId best_action = 0;
  double best_logit = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < action_count_; ++a) {
    const double* row = weights_.data() + static_cast<std::size_t>(a) * cols;
    double z = row[key_dim_];
    for (std::size_t j = 0; j < goal.size(); ++j) z += row[j] * goal[j];
    for (std::size_t j = 0; j < observation.size(); ++j) {
      z += row[goal.size() + j] * observation[j];
    }
    if (z > best_logit) {
      best_logit = z;
      best_action = a;
    }
  }
  return best_action;
}

namespace {

constexpr char kPolicyMagic[] = "adademo-policy";
constexpr int kPolicyVersion = 1;

void WriteDouble(std::ostream& out, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  out.write(buf, r.ptr - buf);
}

double ReadDouble(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw ParseError("truncated policy record", 0);
  double x = 0.0;
  const auto r = std::from_chars(token.data(), token.data() + token.size(), x);
  if (r.ec != std::errc() || r.ptr != token.data() + token.size()) {
    throw ParseError("bad number '" + token + "' in policy record", 0);
  }
  return x;
}

template <typename T>
T ReadValue(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) {
    throw ParseError(std::string("policy record: missing ") + what, 0);
  }
  return value;
}

void Expect(std::istream& in, const std::string& word) {
  if (ReadValue<std::string>(in, word.c_str()) != word) {
    throw ParseError("policy record: expected '" + word + "'", 0);
  }
}

}  // namespace

void Policy::Save(std::ostream& out) const {
  out << kPolicyMagic << ' ' << kPolicyVersion << '\n'
      << "kind " << PolicyKindName(kind_) << " capacity " << capacity_
      << " train_seed " << train_seed_ << " key_dim " << key_dim_
      << " action_count " << action_count_ << '\n';
  if (kind_ == PolicyKind::kNearestNeighbor) {
    out << "stored " << stored_actions_.size() << '\n';
    for (std::size_t i = 0; i < stored_actions_.size(); ++i) {
      out << stored_tasks_[i] << ' ' << stored_actions_[i];
      for (double x : stored_key(i)) {
        out << ' ';
        WriteDouble(out, x);
      }
      out << '\n';
    }
  } else {
    out << "weights " << action_count_ << ' ' << key_dim_ + 1 << '\n';
    const int cols = key_dim_ + 1;
    for (int a = 0; a < action_count_; ++a) {
      for (int j = 0; j < cols; ++j) {
        if (j > 0) out << ' ';
        WriteDouble(out, weights_[static_cast<std::size_t>(a) * cols + j]);
      }
      out << '\n';
    }
  }
}

Policy Policy::Load(std::istream& in) {
  Expect(in, kPolicyMagic);
  const int version = ReadValue<int>(in, "version");
  if (version != kPolicyVersion) {
    throw ParseError("unsupported policy version " + std::to_string(version),
                     0);
  }
  Policy p;
  Expect(in, "kind");
  p.kind_ = ParsePolicyKind(ReadValue<std::string>(in, "kind"));
  Expect(in, "capacity");
  p.capacity_ = ReadValue<int>(in, "capacity");
  Expect(in, "train_seed");
  p.train_seed_ = ReadValue<Seed>(in, "train_seed");
  Expect(in, "key_dim");
  p.key_dim_ = ReadValue<int>(in, "key_dim");
  Expect(in, "action_count");
  p.action_count_ = ReadValue<int>(in, "action_count");
  if (p.key_dim_ < 1 || p.action_count_ < 1) {
    throw ParseError("policy record: non-positive dimension", 0);
  }
  if (p.kind_ == PolicyKind::kNearestNeighbor) {
    Expect(in, "stored");
    const auto n = ReadValue<std::size_t>(in, "stored count");
    p.stored_keys_.reserve(n * p.key_dim_);
    for (std::size_t i = 0; i < n; ++i) {
      p.stored_tasks_.push_back(ReadValue<int>(in, "task"));
      p.stored_actions_.push_back(ReadValue<ActionId>(in, "action"));
      for (int j = 0; j < p.key_dim_; ++j) {
        p.stored_keys_.push_back(ReadDouble(in));
      }
    }
  } else {
    Expect(in, "weights");
    const int rows = ReadValue<int>(in, "rows");
    const int cols = ReadValue<int>(in, "cols");
    if (rows != p.action_count_ || cols != p.key_dim_ + 1) {
      throw ParseError("policy record: weight shape mismatch", 0);
    }
    p.weights_.reserve(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows * cols; ++i) p.weights_.push_back(ReadDouble(in));
  }
  return p;
}

double SoftmaxCrossEntropy(std::span<const double> weights, int key_dim,
                           int action_count,
                           std::span<const TrainingSample> batch,
                           std::vector<double>* gradient) {
  const int cols = key_dim + 1;
  if (weights.size() != static_cast<std::size_t>(action_count) * cols) {
    throw SchemaError("softmax weight matrix has the wrong size");
  }
  if (gradient) gradient->assign(weights.size(), 0.0);
  if (batch.empty()) return 0.0;

  std::vector<double> x(cols);
  std::vector<double> logits(action_count);
  double loss = 0.0;
  for (const TrainingSample& s : batch) {
    if (static_cast<int>(s.goal.size() + s.observation.size()) != key_dim) {
      throw SchemaError("sample dimension mismatch");
    }
    std::copy(s.goal.begin(), s.goal.end(), x.begin());
    std::copy(s.observation.begin(), s.observation.end(),
              x.begin() + static_cast<std::ptrdiff_t>(s.goal.size()));
    x[key_dim] = 1.0;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < action_count; ++a) {
      const double* row = weights.data() + static_cast<std::size_t>(a) * cols;
      double z = 0.0;
      for (int j = 0; j < cols; ++j) z += row[j] * x[j];
      logits[a] = z;
      max_logit = std::max(max_logit, z);
    }
    double norm = 0.0;
    for (int a = 0; a < action_count; ++a) {
      logits[a] = std::exp(logits[a] - max_logit);
      norm += logits[a];
    }
    loss -= std::log(logits[s.action] / norm);
    if (gradient) {
      for (int a = 0; a < action_count; ++a) {
        const double delta = logits[a] / norm - (a == s.action ? 1.0 : 0.0);
        double* g = gradient->data() + static_cast<std::size_t>(a) * cols;
        for (int j = 0; j < cols; ++j) g[j] += delta * x[j];
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (gradient) {
    for (double& g : *gradient) g *= scale;
  }
  return loss * scale;
}

int EffectiveCapacity(const LearnerConfig& config, const DemoDataset& dataset) {
  if (!(config.capacity_fraction > 0.0)) return config.capacity;
  const double c = config.capacity_fraction *
                   static_cast<double>(dataset.TransitionCount());
  return std::max(1, static_cast<int>(std::lround(c)));
}

Policy Train(const DemoDataset& dataset, const SamplingStrategy& strategy,
             const LearnerConfig& config, int action_count, Seed train_seed) {
  const int capacity = EffectiveCapacity(config, dataset);
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  const std::vector<TaskCount> counts = DatasetCounts(dataset);
  const TaskWeights weights = ComputeTaskWeights(counts, strategy);
  std::vector<TrainingSample> samples =
      DrawTrainingSet(dataset, weights, capacity, train_seed);

  if (config.kind == PolicyKind::kNearestNeighbor) {
    return Policy::NearestNeighbor(samples, action_count, capacity,
                                   train_seed);
  }

  if (config.sgd_steps < 0 || config.batch_size < 1 ||
      !(config.learning_rate > 0.0)) {
    throw ConfigError("invalid SGD hyperparameters");
  }
  const int key_dim = static_cast<int>(samples.front().goal.size() +
                                       samples.front().observation.size());
  std::vector<double> w(static_cast<std::size_t>(action_count) * (key_dim + 1),
                        0.0);
  std::vector<double> grad;
  std::vector<TrainingSample> batch(config.batch_size);
  Rng rng(MixSeed(train_seed) + 1);
  for (int step = 0; step < config.sgd_steps; ++step) {
    for (TrainingSample& b : batch) b = samples[rng.Below(samples.size())];
    SoftmaxCrossEntropy(w, key_dim, action_count, batch, &grad);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= config.learning_rate * grad[i];
    }
  }
  return Policy::LinearSoftmax(key_dim, action_count, std::move(w),
                               config.capacity, train_seed);
}

}  // namespace adademo
