//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_SCAFFOLD_HPP
#define CLIFFMASK_CHEM_SCAFFOLD_HPP

#include <vector>

#include "cliffmask/chem/molecule.hpp"

namespace cliffmask::chem {

// Ring systems plus connecting linkers: terminal acyclic atoms are peeled
// iteratively, and severed neighbors regain hydrogens in place of the lost
// bonds. A molecule with no rings yields the empty scaffold (0 atoms),
// which canonicalizes to "".
inline MoleculeGraph murcko_scaffold(const MoleculeGraph& g) {
  const int n = g.num_atoms();
  const RingInfo& ri = g.ring_info();
  bool any_ring = false;
  for (char c : ri.atom_in_ring) any_ring |= (c != 0);
  if (!any_ring) return MoleculeGraph{};

  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  std::vector<int> hfill(static_cast<std::size_t>(n), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!alive[static_cast<std::size_t>(i)] ||
          ri.atom_in_ring[static_cast<std::size_t>(i)]) {
        continue;
      }
      int live_degree = 0;
      int last_nbr = -1;
      int last_bond = -1;
      for (auto [v, bi] : g.neighbors(i)) {
        if (alive[static_cast<std::size_t>(v)]) {
          ++live_degree;
          last_nbr = v;
          last_bond = bi;
        }
      }
      if (live_degree <= 1) {
        alive[static_cast<std::size_t>(i)] = 0;
        if (last_nbr >= 0) {
          hfill[static_cast<std::size_t>(last_nbr)] +=
              order_code(g.bond(last_bond).order);
        }
        changed = true;
      }
    }
  }

  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (alive[static_cast<std::size_t>(i)]) keep.push_back(i);
  }
  MoleculeGraph out = g.subgraph(keep);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.atom(static_cast<int>(k)).hcount +=
        hfill[static_cast<std::size_t>(keep[k])];
  }
  return out;
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_SCAFFOLD_HPP
