//
// Project SmiEdit - Copyright 2026 The SmiEdit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SMIEDIT_RNG_H_
#define SMIEDIT_RNG_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

namespace smiedit {

// SplitMix64 finalizer. Used to derive independent per-record seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t k: keys)
    s = mix64(s ^ mix64(k));
  return s;
}

// Seeded generator with platform-independent draws. The standard
// distributions are implementation defined, so they are avoided here.
class Rng {
public:
  explicit Rng(std::uint64_t seed): engine_(seed) { }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform in [0, n), rejection sampled. n must be positive.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0)
      u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = static_cast<decltype(i)>(index(static_cast<std::uint64_t>(i + 1)));
      std::swap(first[i], first[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace smiedit

#endif  // SMIEDIT_RNG_H_
