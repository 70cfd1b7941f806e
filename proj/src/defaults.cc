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
#include "adademo/harness.h"

namespace adademo {

std::vector<TaskSpec> DefaultSuite() {
  struct Row {
    int size;
    double density;
    bool key;
  };
  constexpr Row kRows[] = {
      {6, 0.10, false},  {8, 0.25, false},  {10, 0.10, false},
      {12, 0.25, false}, {6, 0.25, true},   {8, 0.10, true},
      {10, 0.25, true},  {12, 0.10, true},
  };
  std::vector<TaskSpec> suite;
  int id = 0;
  for (const Row& r : kRows) {
    TaskSpec t;
    t.task_id = id;
    t.grid_width = r.size;
    t.grid_height = r.size;
    t.obstacle_density = r.density;
    t.requires_key = r.key;
    t.horizon = (r.key ? 4 : 3) * 2 * r.size;
    t.layout_seed = 1000 + 17 * static_cast<Seed>(id);
    suite.push_back(t);
    ++id;
  }
  return suite;
}

RunConfig DefaultConfig() {
  RunConfig c;
  c.suite = DefaultSuite();
  c.rounds = {
      {1, 20, 40, 100, 30},
      {2, 40, 80, 100, 50},
      {3, 80, 160, 100, 100},
  };
  c.method = Method::kAdaDemo;
  c.strategy = {SamplingKind::kUniformOverTrajectory,
                0.5 / static_cast<double>(c.suite.size())};
  c.master_seed = 7;
  c.initial_demos_per_task = 20;
  c.num_seeds = 3;
  return c;
}

}  // namespace adademo
