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

#include "adademo/envs.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "adademo/error.h"

namespace adademo {
namespace {

constexpr int kLayoutAttempts = 100;
constexpr int kResetAttempts = 10000;

constexpr Cell kMoves[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};

void CheckSpec(const TaskSpec& spec, int num_tasks) {
  const std::string id = "task " + std::to_string(spec.task_id) + ": ";
  if (num_tasks < 1 || num_tasks > 255) {
    throw ConfigError("suite size must be in [1, 255]");
  }
  if (spec.task_id < 0 || spec.task_id >= num_tasks) {
    throw ConfigError(id + "task_id outside [0, " + std::to_string(num_tasks) +
                      ")");
  }
  if (spec.grid_width < 2 || spec.grid_height < 2) {
    throw ConfigError(id + "grid dimensions must be >= 2");
  }
  if (spec.grid_width > 64 || spec.grid_height > 64) {
    throw ConfigError(id + "grid dimensions must be <= 64");
  }
  if (!(spec.obstacle_density >= 0.0 && spec.obstacle_density <= 0.4)) {
    throw ConfigError(id + "obstacle_density must be in [0, 0.4]");
  }
  if (spec.horizon <= 0) throw ConfigError(id + "horizon must be positive");
}

}  // namespace

GridTask::GridTask(const TaskSpec& spec, int num_tasks)
    : spec_(spec), num_tasks_(num_tasks) {
  CheckSpec(spec, num_tasks);
  const int w = spec.grid_width;
  const int h = spec.grid_height;
  const int cells = w * h;
  const int obstacles =
      static_cast<int>(std::lround(spec.obstacle_density * cells));
  const int needed = spec.requires_key ? 3 : 2;

  Rng rng(spec.layout_seed);
  bool found = false;
  for (int attempt = 0; attempt < kLayoutAttempts && !found; ++attempt) {
    std::vector<int> order(cells);
    for (int i = 0; i < cells; ++i) order[i] = i;
    for (int i = cells - 1; i > 0; --i) {
      std::swap(order[i], order[rng.Below(static_cast<std::uint64_t>(i) + 1)]);
    }
    obstacle_.assign(cells, false);
    for (int i = 0; i < obstacles; ++i) obstacle_[order[i]] = true;

    // Label connected components of free cells; keep the largest.
    std::vector<int> label(cells, -1);
    int best_label = -1;
    int best_size = 0;
    int next_label = 0;
    for (int start = 0; start < cells; ++start) {
      if (obstacle_[start] || label[start] >= 0) continue;
      int size = 0;
      std::deque<int> queue{start};
      label[start] = next_label;
      while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        ++size;
        const Cell c{cur % w, cur / w};
        for (const Cell& m : kMoves) {
          const Cell n{c.x + m.x, c.y + m.y};
          if (!InBounds(n)) continue;
          const int ni = Index(n);
          if (obstacle_[ni] || label[ni] >= 0) continue;
          label[ni] = next_label;
          queue.push_back(ni);
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next_label;
      }
      ++next_label;
    }
    // Require the main component to hold at least half the free cells.
    if (best_size >= needed && 2 * best_size >= cells - obstacles) {
      reachable_.assign(cells, false);
      reachable_cells_.clear();
      for (int i = 0; i < cells; ++i) {
        if (label[i] == best_label) {
          reachable_[i] = true;
          reachable_cells_.push_back({i % w, i / w});
        }
      }
      reachable_count_ = best_size;
      found = true;
    }
  }
  if (!found) {
    throw GenerationError("task " + std::to_string(spec.task_id) +
                          ": no usable layout after " +
                          std::to_string(kLayoutAttempts) + " attempts");
  }

  int diameter = 0;
  for (const Cell& c : reachable_cells_) {
    for (int d : DistancesFrom(c)) diameter = std::max(diameter, d);
  }
  // Key tasks: walk to the key, grab, walk to the goal.
  max_solution_length_ = spec.requires_key ? 2 * diameter + 1 : diameter;
  if (spec.horizon < max_solution_length_) {
    throw ConfigError("task " + std::to_string(spec.task_id) + ": horizon " +
                      std::to_string(spec.horizon) +
                      " shorter than worst-case solution " +
                      std::to_string(max_solution_length_));
  }
}

bool GridTask::InBounds(Cell c) const {
  return c.x >= 0 && c.y >= 0 && c.x < spec_.grid_width &&
         c.y < spec_.grid_height;
}

bool GridTask::IsObstacle(Cell c) const {
  return !InBounds(c) || obstacle_[Index(c)];
}

bool GridTask::IsReachableCell(Cell c) const {
  return InBounds(c) && reachable_[Index(c)];
}

EnvState GridTask::Reset(Seed init_seed) const {
  Rng rng(init_seed ^ MixSeed(spec_.layout_seed));
  const std::uint64_t cells =
      static_cast<std::uint64_t>(spec_.grid_width) * spec_.grid_height;
  int attempts = 0;
  auto draw = [&]() {
    while (attempts++ < kResetAttempts) {
      const auto i = static_cast<int>(rng.Below(cells));
      const Cell c{i % spec_.grid_width, i / spec_.grid_width};
      if (IsReachableCell(c)) return c;
    }
    throw GenerationError("task " + std::to_string(spec_.task_id) +
                          ": reset exhausted its retry budget");
  };

  EnvState state;
  state.agent_pos = draw();
  do {
    state.goal_pos = draw();
  } while (state.goal_pos == state.agent_pos);
  if (spec_.requires_key) {
    Cell key;
    do {
      key = draw();
    } while (key == state.agent_pos || key == state.goal_pos);
    state.key_pos = key;
  }
  return state;
}

Cell GridTask::Move(Cell from, ActionId action) const {
  if (action < kUp || action > kRight) return from;
  const Cell next{from.x + kMoves[action].x, from.y + kMoves[action].y};
  return IsObstacle(next) ? from : next;
}

bool GridTask::IsSuccess(const EnvState& state) const {
  return state.agent_pos == state.goal_pos &&
         (!spec_.requires_key || state.has_key);
}

bool GridTask::IsDone(const EnvState& state) const {
  return IsSuccess(state) || state.steps_taken >= spec_.horizon;
}

StepResult GridTask::Step(const EnvState& state, ActionId action) const {
  if (IsDone(state)) {
    throw UsageError("step after episode end on task " +
                     std::to_string(spec_.task_id));
  }
  if (action < 0 || action >= kActionCount) {
    throw UsageError("action " + std::to_string(action) + " out of range");
  }
  StepResult result;
  result.state = state;
  EnvState& next = result.state;
  if (action == kGrab) {
    if (next.key_pos && next.agent_pos == *next.key_pos) next.has_key = true;
  } else {
    next.agent_pos = Move(state.agent_pos, action);
  }
  ++next.steps_taken;
  result.success = IsSuccess(next);
  result.done = result.success || next.steps_taken >= spec_.horizon;
  return result;
}

GoalDescription GridTask::Goal(const EnvState& state) const {
  GoalDescription goal(GoalDim(num_tasks_), 0.0);
  goal[spec_.task_id] = 1.0;
  goal[num_tasks_] = state.goal_pos.x / double(spec_.grid_width - 1);
  goal[num_tasks_ + 1] = state.goal_pos.y / double(spec_.grid_height - 1);
  return goal;
}

Observation GridTask::Observe(const EnvState& state) const {
  const double sx = 1.0 / (spec_.grid_width - 1);
  const double sy = 1.0 / (spec_.grid_height - 1);
  Observation obs(kObservationDim, 0.0);
  obs[0] = state.agent_pos.x * sx;
  obs[1] = state.agent_pos.y * sy;
  obs[2] = state.has_key ? 1.0 : 0.0;
  obs[3] = state.goal_pos.x * sx;
  obs[4] = state.goal_pos.y * sy;
  obs[5] = state.key_pos ? state.key_pos->x * sx : -1.0;
  obs[6] = state.key_pos ? state.key_pos->y * sy : -1.0;
  // Offset in cells to the current subgoal.
  const bool key_pending = state.key_pos && !state.has_key;
  const Cell target = key_pending ? *state.key_pos : state.goal_pos;
  obs[7] = target.x - state.agent_pos.x;
  obs[8] = target.y - state.agent_pos.y;
  for (int a = 0; a < 4; ++a) {
    if (Move(state.agent_pos, a) == state.agent_pos) obs[9 + a] = kBlockedFlag;
  }
  return obs;
}

std::vector<int> GridTask::DistancesFrom(Cell target) const {
  std::vector<int> dist(spec_.grid_width * spec_.grid_height, -1);
  if (IsObstacle(target)) return dist;
  std::deque<Cell> queue{target};
  dist[Index(target)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const Cell& m : kMoves) {
      const Cell n{c.x + m.x, c.y + m.y};
      if (IsObstacle(n) || dist[Index(n)] >= 0) continue;
      dist[Index(n)] = dist[Index(c)] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

std::vector<GridTask> BuildSuite(std::span<const TaskSpec> specs) {
  std::vector<GridTask> suite;
  suite.reserve(specs.size());
  const int m = static_cast<int>(specs.size());
  for (int k = 0; k < m; ++k) {
    if (specs[k].task_id != k) {
      throw ConfigError("suite entry " + std::to_string(k) + " has task_id " +
                        std::to_string(specs[k].task_id));
    }
    suite.emplace_back(specs[k], m);
  }
  return suite;
}

ActionId OracleAction(const GridTask& task, const EnvState& state,
                      std::span<const int> key_distances,
                      std::span<const int> goal_distances) {
  const bool fetch = task.spec().requires_key && !state.has_key;
  if (fetch && state.key_pos && state.agent_pos == *state.key_pos) {
    return kGrab;
  }
  const std::span<const int> dist = fetch ? key_distances : goal_distances;
  const int w = task.spec().grid_width;
  const int here = dist[state.agent_pos.y * w + state.agent_pos.x];
  if (here < 0) {
    throw OracleError("task " + std::to_string(task.task_id()) +
                      ": target unreachable from agent position");
  }
  for (ActionId a = kUp; a <= kRight; ++a) {
    const Cell next = task.Move(state.agent_pos, a);
    if (next != state.agent_pos && dist[next.y * w + next.x] == here - 1) {
      return a;
    }
  }
  throw OracleError("task " + std::to_string(task.task_id()) +
                    ": no distance-decreasing move");
}

std::optional<Trajectory> OracleCollect(const GridTask& task, Seed init_seed,
                                        const CollectorSpec& collector,
                                        Seed rng_seed, int source_round) {
  if (!(collector.failure_prob >= 0.0 && collector.failure_prob < 1.0)) {
    throw ConfigError("collector failure_prob must be in [0, 1)");
  }
  if (collector.retries < 0) {
    throw ConfigError("collector retries must be >= 0");
  }
  Rng rng(rng_seed);
  bool accepted = false;
  for (int attempt = 0; attempt <= collector.retries; ++attempt) {
    if (rng.Uniform() >= collector.failure_prob) {
      accepted = true;
      break;
    }
  }
  if (!accepted) return std::nullopt;

  EnvState state = task.Reset(init_seed);
  const std::vector<int> goal_dist = task.DistancesFrom(state.goal_pos);
  const std::vector<int> key_dist =
      state.key_pos ? task.DistancesFrom(*state.key_pos) : std::vector<int>{};

  Trajectory trajectory;
  trajectory.init_seed = init_seed;
  trajectory.source_round = source_round;
  trajectory.goal = task.Goal(state);
  while (true) {
    const ActionId action = OracleAction(task, state, key_dist, goal_dist);
    trajectory.transitions.push_back({task.Observe(state), action});
    const StepResult r = task.Step(state, action);
    state = r.state;
    if (r.success) break;
    if (r.done) {
      throw OracleError("task " + std::to_string(task.task_id()) +
                        ": oracle ran out of horizon");
    }
  }
  return trajectory;
}

bool ReplayVerify(const GridTask& task, const Trajectory& trajectory) {
  if (trajectory.transitions.empty()) return false;
  EnvState state = task.Reset(trajectory.init_seed);
  if (task.Goal(state) != trajectory.goal) return false;
  const std::size_t n = trajectory.transitions.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& tr = trajectory.transitions[i];
    if (task.Observe(state) != tr.observation) return false;
    if (tr.action < 0 || tr.action >= kActionCount) return false;
    const StepResult r = task.Step(state, tr.action);
    if (r.done) return r.success && i + 1 == n;
    state = r.state;
  }
  return false;
}

}  // namespace adademo
