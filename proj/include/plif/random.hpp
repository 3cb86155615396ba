// Copyright 2026 The plif-snn Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PLIF_RANDOM_HPP
#define PLIF_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string>

namespace plif {

/// The single engine used for initialization, shuffling, dropout and
/// augmentation. Draws below are built on raw engine output so sequences do
/// not depend on the standard library's distribution implementations.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n), rejection sampled.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Fisher-Yates over a random-access range.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(
        uniform_index(rng, static_cast<std::uint64_t>(i + 1)));
    std::swap(first[i], first[j]);
  }
}

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

}  // namespace plif

#endif  // PLIF_RANDOM_HPP
