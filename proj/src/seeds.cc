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

#include "adademo/seeds.h"

#include <limits>
#include <string>

#include "adademo/error.h"

namespace adademo {

Seed DeriveSeed(Seed master, SeedPurpose purpose, int round, int task,
                std::uint64_t index) {
  constexpr std::uint64_t kIndexLimit = 1ULL << 40;
  if (round < 0 || round > 255 || task < 0 || task > 255 ||
      index >= kIndexLimit) {
    throw ConfigError("seed slot out of range: round=" +
                      std::to_string(round) + " task=" + std::to_string(task) +
                      " index=" + std::to_string(index));
  }
  const std::uint64_t packed =
      (static_cast<std::uint64_t>(purpose) << 56) |
      (static_cast<std::uint64_t>(round) << 48) |
      (static_cast<std::uint64_t>(task) << 40) | index;
  return MixSeed(MixSeed(master) ^ packed);
}

std::uint64_t Rng::Below(std::uint64_t n) {
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace adademo
