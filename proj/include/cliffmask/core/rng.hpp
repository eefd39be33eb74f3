//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CORE_RNG_HPP
#define CLIFFMASK_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace cliffmask {

// Deterministic splitmix64 generator. std::* distributions are
// implementation-defined, so all sampling helpers live here to keep outputs
// bit-stable across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag0,
                                   std::uint64_t tag1 = 0,
                                   std::uint64_t tag2 = 0) {
    std::uint64_t s = mix(seed ^ 0xD1B54A32D192ED03ULL);
    s = mix(s ^ tag0);
    s = mix(s ^ tag1);
    return mix(s ^ tag2);
  }

  // Independent stream derived from (seed, tags...); order of derivation does
  // not depend on call history.
  static Rng derive(std::uint64_t seed, std::uint64_t tag0,
                    std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
    return Rng(derive_seed(seed, tag0, tag1, tag2));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller without spare caching so that draw counts stay predictable.
  double gaussian() {
    const double u = 1.0 - unit();  // (0, 1]
    const double v = unit();
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(6.28318530717958647692 * v);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::uint64_t state_;
};

}  // namespace cliffmask

#endif  // CLIFFMASK_CORE_RNG_HPP
