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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace simulacra {

/// Seeded pseudo-random stream with a fixed, documented algorithm so the
/// same seed yields the same draws on every platform:
///
///   state    xoshiro256**, the four state words filled by successive
///            splitmix64 outputs starting from the seed
///   uniform  top 53 bits of next_u64() scaled by 2^-53, in [0, 1)
///   gaussian Box-Muller cosine branch over two uniforms (no caching):
///            sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
///   index    Lemire's multiply-shift with rejection, unbiased in [0, n)
///
/// Not thread-safe; give each worker its own stream via child().
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  double uniform();
  double gaussian(double mean, double stdev);
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent stream keyed off this stream's seed (not its position).
  RngStream child(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

/// Seed for the key-th child of a stream seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace simulacra
