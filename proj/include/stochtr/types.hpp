// Copyright 2026 The stochtr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOCHTR_TYPES_HPP
#define STOCHTR_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace stochtr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSpan = std::span<const std::size_t>;

/// Counter-based generator: the k-th output is a SplitMix64 finalizer applied
/// to seed + k * golden-gamma, so any draw can be replayed from (seed, k).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::size_t uniform_index(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t limit = max() - max() % b;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return static_cast<std::size_t>(v % b);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Source of index multisets for the stochastic estimators. Tests substitute
/// scripted or recording samplers.
class IndexSampler {
 public:
  virtual ~IndexSampler() = default;
  /// Draws `count` indices from [0, n) with replacement into `out`.
  virtual void draw(std::size_t n, std::size_t count,
                    std::vector<std::size_t>& out) = 0;
};

class UniformSampler final : public IndexSampler {
 public:
  explicit UniformSampler(std::uint64_t seed) : rng_(seed) {}
  void draw(std::size_t n, std::size_t count,
            std::vector<std::size_t>& out) override {
    out.resize(count);
    for (auto& i : out) i = rng_.uniform_index(n);
  }
  CounterRng& rng() { return rng_; }

 private:
  CounterRng rng_;
};

}  // namespace stochtr

#endif  // STOCHTR_TYPES_HPP
