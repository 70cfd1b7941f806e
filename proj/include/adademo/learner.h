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

#ifndef ADADEMO_LEARNER_H_
#define ADADEMO_LEARNER_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "adademo/core.h"
#include "adademo/seeds.h"

namespace adademo {

enum class SamplingKind {
  kUniformOverDataset,     // weight proportional to stored transitions
  kUniformOverTask,        // equal weight per represented task
  kUniformOverTrajectory,  // weight proportional to trajectory count
};

const char* SamplingKindName(SamplingKind kind);
SamplingKind ParseSamplingKind(const std::string& name);

struct SamplingStrategy {
  SamplingKind kind = SamplingKind::kUniformOverTrajectory;
  // Floor for every task holding at least one trajectory. Must satisfy
  // min_task_weight * M <= 1.
  double min_task_weight = 0.0;
};

struct TaskWeights {
  std::vector<double> weights;
};

// Per-task sampling probabilities for `strategy`. Tasks without
// trajectories get weight zero. Represented tasks whose raw weight falls
// below the floor are raised to it and the remaining mass is shared among
// the other tasks in proportion to their raw weights, repeating until no
// task is below the floor. Throws EmptyDatasetError if every count is zero
// and ConfigError if the floor is infeasible.
TaskWeights ComputeTaskWeights(std::span<const TaskCount> counts,
                               const SamplingStrategy& strategy);

struct TrainingSample {
  int task_id = 0;
  GoalDescription goal;
  Observation observation;
  ActionId action = 0;
};

// `budget` draws with replacement: task by weight, trajectory uniformly
// within the task, transition uniformly within the trajectory.
std::vector<TrainingSample> DrawTrainingSet(const DemoDataset& dataset,
                                            const TaskWeights& weights,
                                            int budget, Seed rng_seed);

enum class PolicyKind { kNearestNeighbor, kLinearSoftmax };

const char* PolicyKindName(PolicyKind kind);
PolicyKind ParsePolicyKind(const std::string& name);

struct LearnerConfig {
  PolicyKind kind = PolicyKind::kNearestNeighbor;
  // Stored transitions (nearest neighbor) or draws per fit (softmax).
  int capacity = 1000;
  // When positive, overrides capacity with this fraction of the training
  // dataset's transition count (at least 1).
  double capacity_fraction = 0.0;
  int sgd_steps = 2000;
  double learning_rate = 0.5;
  int batch_size = 32;
};

int EffectiveCapacity(const LearnerConfig& config, const DemoDataset& dataset);

// Behavior-cloning policy over the concatenated (goal, observation) key.
// Immutable once trained.
class Policy {
 public:
  Policy() = default;

  PolicyKind kind() const { return kind_; }
  int capacity() const { return capacity_; }
  Seed train_seed() const { return train_seed_; }
  int key_dim() const { return key_dim_; }
  int action_count() const { return action_count_; }

  // Nearest neighbor: squared Euclidean distance, ties to the lowest stored
  // index. Softmax: argmax logit, ties to the lowest action id.
  // Throws SchemaError on dimension mismatch.
  ActionId Act(std::span<const double> goal,
               std::span<const double> observation) const;

  // Stored transitions (nearest neighbor only).
  std::size_t stored_count() const { return stored_actions_.size(); }
  int stored_task(std::size_t i) const { return stored_tasks_[i]; }
  std::span<const double> stored_key(std::size_t i) const {
    return {stored_keys_.data() + i * key_dim_,
            static_cast<std::size_t>(key_dim_)};
  }
  ActionId stored_action(std::size_t i) const { return stored_actions_[i]; }

  // Row-major action_count x (key_dim + 1) matrix; last column is the bias.
  const std::vector<double>& softmax_weights() const { return weights_; }

  // Stores the first min(capacity, samples.size()) samples in order.
  static Policy NearestNeighbor(std::span<const TrainingSample> samples,
                                int action_count, int capacity,
                                Seed train_seed);
  static Policy LinearSoftmax(int key_dim, int action_count,
                              std::vector<double> weights, int capacity,
                              Seed train_seed);

  // Versioned text record, lossless for doubles.
  void Save(std::ostream& out) const;
  static Policy Load(std::istream& in);

  bool operator==(const Policy&) const = default;

 private:
  PolicyKind kind_ = PolicyKind::kNearestNeighbor;
  int capacity_ = 0;
  Seed train_seed_ = 0;
  int key_dim_ = 0;
  int action_count_ = 0;
  std::vector<double> stored_keys_;
  std::vector<ActionId> stored_actions_;
  std::vector<int> stored_tasks_;
  std::vector<double> weights_;
};

// Mean softmax cross-entropy of the linear model over `batch`; writes the
// analytic gradient into `gradient` (same layout as weights) when non-null.
double SoftmaxCrossEntropy(std::span<const double> weights, int key_dim,
                           int action_count,
                           std::span<const TrainingSample> batch,
                           std::vector<double>* gradient);

// Trains from scratch. Throws ConfigError for capacity < 1.
Policy Train(const DemoDataset& dataset, const SamplingStrategy& strategy,
             const LearnerConfig& config, int action_count, Seed train_seed);

}  // namespace adademo

#endif  // ADADEMO_LEARNER_H_
