//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gearnetk {

// Deterministic RNG handle. The engine is std::mt19937_64 (raw output is
// specified by the standard); all value mappings (bounded ints, uniforms,
// normals, shuffles) are implemented here so results do not depend on the
// standard library's unspecified distribution algorithms.
//
// Streams: every Rng remembers its construction seed, and `stream(name)`
// derives an independent generator from (seed, name) regardless of how many
// values have been drawn. One root seed therefore governs any number of named
// streams reproducibly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  static std::uint64_t mix(std::uint64_t seed, std::string_view name);
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

  // Independent generator derived from this one's seed and a label.
  Rng stream(std::string_view name) const { return Rng(mix(seed_, name)); }
  Rng stream(std::uint64_t salt) const { return Rng(mix(seed_, salt)); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). n must be > 0. Multiply-shift mapping; the bias is
  // below n * 2^-64 which is irrelevant at the scales used here.
  std::uint64_t bounded(std::uint64_t n);

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Marsaglia polar method.
  double normal();

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in selection order. k must be <= n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  static std::uint64_t mix64(std::uint64_t x);  // splitmix64 finalizer

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace gearnetk
