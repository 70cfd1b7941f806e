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

#include <doctest.h>

#include <cstdint>
#include <set>
#include <vector>

#include "adademo/error.h"

using namespace adademo;

TEST_CASE("derived seeds do not collide across slots") {
  std::set<Seed> seen;
  std::size_t slots = 0;
  for (int p = 1; p <= 6; ++p) {
    for (int round = 0; round < 4; ++round) {
      for (int task = 0; task < 8; ++task) {
        for (std::uint64_t i = 0; i < 200; ++i) {
          seen.insert(DeriveSeed(7, static_cast<SeedPurpose>(p), round, task, i));
          ++slots;
        }
      }
    }
  }
  CHECK(seen.size() == slots);
}

TEST_CASE("derived seeds depend on the master seed") {
  CHECK(DeriveSeed(7, SeedPurpose::kEvaluation, 1, 2, 3) ==
        DeriveSeed(7, SeedPurpose::kEvaluation, 1, 2, 3));
  CHECK(DeriveSeed(7, SeedPurpose::kEvaluation, 1, 2, 3) !=
        DeriveSeed(8, SeedPurpose::kEvaluation, 1, 2, 3));
}

TEST_CASE("slot fields out of range are rejected") {
  CHECK_THROWS_AS(DeriveSeed(1, SeedPurpose::kTraining, 256, 0, 0), ConfigError);
  CHECK_THROWS_AS(DeriveSeed(1, SeedPurpose::kTraining, 0, 256, 0), ConfigError);
  CHECK_THROWS_AS(DeriveSeed(1, SeedPurpose::kTraining, -1, 0, 0), ConfigError);
  CHECK_THROWS_AS(DeriveSeed(1, SeedPurpose::kTraining, 0, 0, 1ULL << 40),
                  ConfigError);
  CHECK_NOTHROW(DeriveSeed(1, SeedPurpose::kTraining, 255, 255, (1ULL << 40) - 1));
}

TEST_CASE("scope forwards to DeriveSeed") {
  const SeedScope scope{11, 2, 5};
  CHECK(scope.At(SeedPurpose::kCollection, 9) ==
        DeriveSeed(11, SeedPurpose::kCollection, 2, 5, 9));
}

TEST_CASE("Rng::Below stays in range and covers it evenly") {
  Rng rng(42);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const std::uint64_t v = rng.Below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(h == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("Rng::Uniform is in [0, 1) and reproducible") {
  Rng a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.Uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.Uniform());
  }
}
