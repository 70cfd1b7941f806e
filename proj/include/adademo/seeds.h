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

#ifndef ADADEMO_SEEDS_H_
#define ADADEMO_SEEDS_H_

#include <cstdint>
#include <random>

namespace adademo {

using Seed = std::uint64_t;

// Stream tags for seed derivation. Values are part of the on-disk
// determinism contract; never renumber.
enum class SeedPurpose : std::uint8_t {
  kBootstrap = 1,
  kEvaluation = 2,
  kCollection = 3,
  kFreshCollection = 4,
  kTraining = 5,
  kCollector = 6,
};

// splitmix64 finalizer. A bijection on 64-bit integers.
constexpr Seed MixSeed(Seed x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Derives the seed for one (purpose, round, task, index) slot.
//
// The slot is packed into 64 bits as
//   purpose[63:56] | round[55:48] | task[47:40] | index[39:0]
// and the result is MixSeed(MixSeed(master) ^ packed). For a fixed master
// seed the map is injective because packing is injective on the admitted
// ranges and both XOR with a constant and MixSeed are bijections.
// Throws ConfigError when round or task exceed 255 or index exceeds 2^40-1.
Seed DeriveSeed(Seed master, SeedPurpose purpose, int round, int task,
                std::uint64_t index);

// Seed scope for one (round, task) pair of a run.
struct SeedScope {
  Seed master = 0;
  int round = 0;
  int task = 0;

  Seed At(SeedPurpose purpose, std::uint64_t index) const {
    return DeriveSeed(master, purpose, round, task, index);
  }
};

// Thin wrapper over mt19937_64 with distribution helpers whose output does
// not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(MixSeed(seed)) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of resolution.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace adademo

#endif  // ADADEMO_SEEDS_H_
