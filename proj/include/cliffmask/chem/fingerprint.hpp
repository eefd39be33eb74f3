//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_FINGERPRINT_HPP
#define CLIFFMASK_CHEM_FINGERPRINT_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::chem {

struct Fingerprint {
  std::vector<std::uint64_t> words;
  int width = 0;
  int radius = 0;

  void set(std::uint64_t bit) {
    words[static_cast<std::size_t>(bit >> 6)] |= 1ull << (bit & 63);
  }

  bool test(std::uint64_t bit) const {
    return (words[static_cast<std::size_t>(bit >> 6)] >> (bit & 63)) & 1;
  }

  int popcount() const {
    int total = 0;
    for (std::uint64_t w : words) total += std::popcount(w);
    return total;
  }

  bool operator==(const Fingerprint& o) const {
    return width == o.width && words == o.words;
  }
};

namespace detail {

// FNV-1a, 64-bit: offset 14695981039346656037, prime 1099511628211. The
// bit index is the digest modulo the fingerprint width.
inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t len,
                           std::uint64_t h = 14695981039346656037ull) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_ints(const std::vector<std::int64_t>& vals) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::int64_t v : vals) {
    auto u = static_cast<std::uint64_t>(v);
    std::uint8_t bytes[8];
    for (int k = 0; k < 8; ++k) {
      bytes[k] = static_cast<std::uint8_t>(u >> (8 * k));
    }
    h = fnv1a(bytes, 8, h);
  }
  return h;
}

}  // namespace detail

// Iterative neighborhood-hashing fingerprint. Radius 0 hashes the bare
// atom invariant (element, charge, aromatic); each further iteration
// folds in the sorted (bond order, neighbor key) shell. Invariant under
// atom-index permutation because every ingredient is.
inline Fingerprint ecfp(const MoleculeGraph& g, int radius = 2,
                        int width = 2048) {
  if (radius < 0 || radius > 4) {
    raise(Errc::kConfigInvalid, "ecfp radius must be in [0,4]");
  }
  if (width < 256 || (width & (width - 1)) != 0) {
    raise(Errc::kConfigInvalid, "ecfp width must be a power of two >= 256");
  }
  Fingerprint fp;
  fp.width = width;
  fp.radius = radius;
  fp.words.assign(static_cast<std::size_t>(width / 64), 0);

  const int n = g.num_atoms();
  std::vector<std::uint64_t> key(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = g.atom(i);
    key[static_cast<std::size_t>(i)] = detail::fnv1a_ints(
        {a.z, a.formal_charge, a.aromatic ? 1 : 0});
    fp.set(key[static_cast<std::size_t>(i)] %
           static_cast<std::uint64_t>(width));
  }
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::int64_t, std::int64_t>> shell;
      for (auto [v, bi] : g.neighbors(i)) {
        shell.push_back({static_cast<std::int64_t>(g.bond(bi).order),
                         static_cast<std::int64_t>(
                             key[static_cast<std::size_t>(v)])});
      }
      std::sort(shell.begin(), shell.end());
      std::vector<std::int64_t> flat;
      flat.push_back(static_cast<std::int64_t>(r));
      flat.push_back(
          static_cast<std::int64_t>(key[static_cast<std::size_t>(i)]));
      for (auto [o, k] : shell) {
        flat.push_back(o);
        flat.push_back(k);
      }
      next[static_cast<std::size_t>(i)] = detail::fnv1a_ints(flat);
      fp.set(next[static_cast<std::size_t>(i)] %
             static_cast<std::uint64_t>(width));
    }
    key = std::move(next);
  }
  return fp;
}

// |a AND b| / |a OR b|; two all-zero fingerprints compare as 1.0.
inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width != b.width) {
    raise(Errc::kWidthMismatch, "fingerprint widths differ");
  }
  int inter = 0;
  int uni = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    inter += std::popcount(a.words[w] & b.words[w]);
    uni += std::popcount(a.words[w] | b.words[w]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_FINGERPRINT_HPP
