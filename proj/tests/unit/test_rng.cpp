// Copyright 2026 The Simulacra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Frozen vectors come from tests/oracles/oracle.py, an independent Python
// implementation of the same published algorithms.

#include <doctest.h>

#include <map>
#include <vector>

#include "simulacra/error.hpp"
#include "simulacra/rng.hpp"

using namespace simulacra;

TEST_CASE("xoshiro256** stream at seed 0 and 42") {
  RngStream a(0);
  for (auto want : {0x99ec5f36cb75f2b4ULL, 0xbf6e1f784956452aULL, 0x1a5f849d4933e6e0ULL,
                    0x6aa594f1262d2d2cULL, 0xbba5ad4a1f842e59ULL}) {
    CHECK(a.next_u64() == want);
  }
  RngStream b(42);
  for (auto want : {0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL, 0xae17533239e499a1ULL,
                    0xecb8ad4703b360a1ULL, 0xfde6dc7fe2ec5e64ULL}) {
    CHECK(b.next_u64() == want);
  }
}

TEST_CASE("uniform uses the top 53 bits") {
  RngStream r(42);
  CHECK(r.uniform() == 0.08386297105988216);
  CHECK(r.uniform() == 0.3789802506626686);
  CHECK(r.uniform() == 0.6800434110281394);
}

TEST_CASE("gaussian is Box-Muller over two uniforms") {
  RngStream r(42);
  CHECK(r.gaussian(0.0, 1.0) == doctest::Approx(-0.303263064678738).epsilon(1e-12));
  CHECK(r.gaussian(0.0, 1.0) == doctest::Approx(1.3438117634372806).epsilon(1e-12));
  CHECK(r.gaussian(0.0, 1.0) == doctest::Approx(0.3834617912676943).epsilon(1e-12));
  RngStream s(42);
  CHECK(s.gaussian(0.65, 0.0) == 0.65);
}

TEST_CASE("index is unbiased bounded sampling") {
  RngStream r(7);
  std::vector<std::size_t> got;
  for (int i = 0; i < 10; ++i) got.push_back(r.index(10));
  CHECK(got == std::vector<std::size_t>{7, 2, 8, 9, 9, 8, 0, 1, 4, 1});
  RngStream s(7);
  got.clear();
  for (int i = 0; i < 10; ++i) got.push_back(s.index(3));
  CHECK(got == std::vector<std::size_t>{2, 0, 2, 2, 2, 2, 0, 0, 1, 0});
  CHECK_THROWS_AS(s.index(0), Error);
  CHECK(s.index(1) == 0);
}

TEST_CASE("index is roughly uniform") {
  RngStream r(99);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 60000; ++i) ++counts[r.index(6)];
  for (const auto& [k, n] : counts) CHECK(n == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("derived seeds give independent, reproducible children") {
  CHECK(derive_seed(42, 7) == 0x6eab8625df268fbcULL);
  RngStream parent(42);
  RngStream c1 = parent.child(7);
  RngStream c2(derive_seed(42, 7));
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(parent.child(1).next_u64() != parent.child(2).next_u64());
  CHECK(parent.seed() == 42);
}
