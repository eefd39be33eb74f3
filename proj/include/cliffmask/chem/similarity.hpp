//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_SIMILARITY_HPP
#define CLIFFMASK_CHEM_SIMILARITY_HPP

#include <algorithm>
#include <string_view>
#include <vector>

namespace cliffmask::chem {

// Classic two-row DP over insert/delete/substitute, unit costs.
inline int levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

// 1 - dist/max(|a|,|b|); two empty strings are identical by convention.
inline double smiles_similarity(std::string_view a, std::string_view b) {
  std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_SIMILARITY_HPP
