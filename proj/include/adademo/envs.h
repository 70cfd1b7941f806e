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

#ifndef ADADEMO_ENVS_H_
#define ADADEMO_ENVS_H_

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "adademo/core.h"
#include "adademo/seeds.h"

namespace adademo {

// Discrete action set shared by every task in a suite.
enum Action : ActionId {
  kUp = 0,
  kDown = 1,
  kLeft = 2,
  kRight = 3,
  kGrab = 4,
};
inline constexpr int kActionCount = 5;

// agent x, agent y, has_key, goal x, goal y, key x, key y (normalized to
// [0, 1], key -1 when absent); offset in cells to the current subgoal (the key
// until it is held, then the goal); one flag per move direction (up, down,
// left, right) set to kBlockedFlag when that move is blocked.
inline constexpr int kObservationDim = 13;
inline constexpr double kBlockedFlag = 3.0;

// Suite-wide goal dimension: task one-hot plus the goal cell.
constexpr int GoalDim(int num_tasks) { return num_tasks + 2; }

struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

struct TaskSpec {
  int task_id = 0;
  int grid_width = 6;
  int grid_height = 6;
  double obstacle_density = 0.0;
  bool requires_key = false;
  int horizon = 50;
  Seed layout_seed = 0;

  bool operator==(const TaskSpec&) const = default;
};

struct EnvState {
  Cell agent_pos;
  bool has_key = false;
  Cell goal_pos;
  std::optional<Cell> key_pos;
  int steps_taken = 0;

  bool operator==(const EnvState&) const = default;
};

struct StepResult {
  EnvState state;
  bool done = false;
  bool success = false;
};

// Imperfect collector model: each attempt is refused with failure_prob;
// `retries` extra attempts follow the first refusal.
struct CollectorSpec {
  double failure_prob = 0.0;
  int retries = 0;
};

// A task with its obstacle layout materialized. Immutable after
// construction, so a const GridTask may be shared across threads.
class GridTask {
 public:
  // Generates the layout from spec.layout_seed. Throws ConfigError for
  // out-of-range parameters or a horizon shorter than the longest possible
  // solution, GenerationError when no usable layout is found.
  GridTask(const TaskSpec& spec, int num_tasks);

  const TaskSpec& spec() const { return spec_; }
  int task_id() const { return spec_.task_id; }
  int num_tasks() const { return num_tasks_; }
  int goal_dim() const { return GoalDim(num_tasks_); }

  bool InBounds(Cell c) const;
  bool IsObstacle(Cell c) const;
  // Free cells of the largest 4-connected component; initial positions
  // are drawn from these.
  bool IsReachableCell(Cell c) const;
  int ReachableCellCount() const { return reachable_count_; }

  // Deterministic in (spec, init_seed). Rejects and resamples until agent,
  // goal and key occupy distinct, mutually reachable cells.
  EnvState Reset(Seed init_seed) const;

  // Throws UsageError if the episode has already ended.
  StepResult Step(const EnvState& state, ActionId action) const;

  bool IsSuccess(const EnvState& state) const;
  bool IsDone(const EnvState& state) const;

  GoalDescription Goal(const EnvState& state) const;
  Observation Observe(const EnvState& state) const;

  // BFS distances from `target` to every cell, -1 where unreachable.
  // Indexed by y * width + x.
  std::vector<int> DistancesFrom(Cell target) const;

  // Upper bound on the shortest solution from any initial state.
  int MaxSolutionLength() const { return max_solution_length_; }

  // Cell reached by a movement action, respecting walls and obstacles.
  Cell Move(Cell from, ActionId action) const;

 private:
  int Index(Cell c) const { return c.y * spec_.grid_width + c.x; }

  TaskSpec spec_;
  int num_tasks_;
  std::vector<bool> obstacle_;
  std::vector<bool> reachable_;
  std::vector<Cell> reachable_cells_;
  int reachable_count_ = 0;
  int max_solution_length_ = 0;
};

std::vector<GridTask> BuildSuite(std::span<const TaskSpec> specs);

// The shipped eight-task suite, ordered roughly from easiest to hardest.
std::vector<TaskSpec> DefaultSuite();

// Expert action from `state`: shortest path to the key, grab, then shortest
// path to the goal. Ties prefer the lowest action id. Throws OracleError
// when the current target is unreachable.
ActionId OracleAction(const GridTask& task, const EnvState& state,
                      std::span<const int> key_distances,
                      std::span<const int> goal_distances);

// Demonstration from the initial state `init_seed`, or nullopt if the
// collector refused every attempt. Throws ConfigError for failure_prob
// outside [0, 1).
std::optional<Trajectory> OracleCollect(const GridTask& task, Seed init_seed,
                                        const CollectorSpec& collector,
                                        Seed rng_seed, int source_round = 0);

// True iff replaying the actions from Reset(init_seed) reproduces every
// recorded goal and observation and the final step succeeds.
bool ReplayVerify(const GridTask& task, const Trajectory& trajectory);

}  // namespace adademo

#endif  // ADADEMO_ENVS_H_
