//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_CANONICAL_HPP
#define CLIFFMASK_CHEM_CANONICAL_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::chem {

namespace detail {

// Iterative neighborhood refinement. Ranks are 0-based, dense, and equal
// ranks mean "indistinguishable so far". Returns the refined ranks.
inline std::vector<int> refine_ranks(const MoleculeGraph& g,
                                     std::vector<int> ranks) {
  const int n = g.num_atoms();
  int classes = 0;
  for (int r : ranks) classes = std::max(classes, r + 1);
  while (true) {
    std::vector<std::pair<std::vector<int>, int>> keys(
        static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<int> key;
      key.push_back(ranks[static_cast<std::size_t>(i)]);
      std::vector<std::pair<int, int>> nbr;
      for (auto [v, bi] : g.neighbors(i)) {
        nbr.push_back({static_cast<int>(g.bond(bi).order),
                       ranks[static_cast<std::size_t>(v)]});
      }
      std::sort(nbr.begin(), nbr.end());
      for (auto [o, r] : nbr) {
        key.push_back(o);
        key.push_back(r);
      }
      keys[static_cast<std::size_t>(i)] = {std::move(key), i};
    }
    std::vector<std::pair<std::vector<int>, int>> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> next(static_cast<std::size_t>(n));
    int rank = -1;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k == 0 || sorted[k].first != sorted[k - 1].first) ++rank;
      next[static_cast<std::size_t>(sorted[k].second)] = rank;
    }
    int next_classes = rank + 1;
    if (next_classes == classes) return next;
    classes = next_classes;
    ranks = std::move(next);
  }
}

inline std::vector<int> initial_ranks(const MoleculeGraph& g) {
  const int n = g.num_atoms();
  std::vector<std::pair<std::tuple<int, int, int, int>, int>> keys;
  keys.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = g.atom(i);
    keys.push_back(
        {{a.z, g.degree(i), a.formal_charge, a.aromatic ? 1 : 0}, i});
  }
  std::sort(keys.begin(), keys.end());
  std::vector<int> ranks(static_cast<std::size_t>(n));
  int rank = -1;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (k == 0 || keys[k].first != keys[k - 1].first) ++rank;
    ranks[static_cast<std::size_t>(keys[k].second)] = rank;
  }
  return ranks;
}

inline void append_atom_text(const MoleculeGraph& g, int i, std::string& out) {
  const Atom& a = g.atom(i);
  std::string sym{element_symbol(a.z)};
  if (a.aromatic) {
    for (char& c : sym) c = static_cast<char>(std::tolower(c));
  }
  bool bare = a.formal_charge == 0 && in_organic_subset(a.z) &&
              g.inferred_hcount(i) == a.hcount;
  if (bare) {
    out += sym;
    return;
  }
  out += '[';
  out += sym;
  if (a.hcount > 0) {
    out += 'H';
    if (a.hcount > 1) out += std::to_string(a.hcount);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    int mag = a.formal_charge > 0 ? a.formal_charge : -a.formal_charge;
    if (mag > 1) out += std::to_string(mag);
  }
  out += ']';
}

inline void append_bond_text(const MoleculeGraph& g, const Bond& b,
                             std::string& out) {
  bool both_aromatic = g.atom(b.a).aromatic && g.atom(b.b).aromatic;
  switch (b.order) {
    case BondOrder::kSingle:
      if (both_aromatic) out += '-';
      break;
    case BondOrder::kDouble:
      out += '=';
      break;
    case BondOrder::kTriple:
      out += '#';
      break;
    case BondOrder::kAromatic:
      if (!both_aromatic) out += ':';
      break;
  }
}

// Emits SMILES for a connected graph with fully discrete ranks: DFS from
// the rank-0 atom, children in ascending rank, ring-closure digits
// allocated in emission order.
class SmilesWriter {
 public:
  SmilesWriter(const MoleculeGraph& g, const std::vector<int>& ranks)
      : g_(g), ranks_(ranks) {}

  std::string write() {
    const int n = g_.num_atoms();
    if (n == 0) return "";
    bond_digit_.assign(static_cast<std::size_t>(g_.num_bonds()), 0);
    next_digit_ = 1;
    int start = 0;
    for (int i = 0; i < n; ++i) {
      if (ranks_[static_cast<std::size_t>(i)] == 0) start = i;
    }
    plan_tree(start);
    std::string out;
    emit(start, -1, out);
    return out;
  }

 private:
  void plan_tree(int start) {
    const int n = g_.num_atoms();
    tree_children_.assign(static_cast<std::size_t>(n), {});
    ring_bonds_.assign(static_cast<std::size_t>(n), {});
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<char> is_back(static_cast<std::size_t>(g_.num_bonds()), 0);
    struct Frame {
      int atom;
      int entry_bond;
      std::vector<std::pair<int, int>> order;  // (neighbor rank, bond idx)
      std::size_t slot = 0;
    };
    std::vector<Frame> stack;
    auto make_frame = [&](int u, int entry) {
      Frame f;
      f.atom = u;
      f.entry_bond = entry;
      for (auto [v, bi] : g_.neighbors(u)) {
        f.order.push_back({ranks_[static_cast<std::size_t>(v)], bi});
      }
      std::sort(f.order.begin(), f.order.end());
      return f;
    };
    seen[static_cast<std::size_t>(start)] = 1;
    stack.push_back(make_frame(start, -1));
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.slot >= f.order.size()) {
        stack.pop_back();
        continue;
      }
      auto [rank, bi] = f.order[f.slot++];
      if (bi == f.entry_bond) continue;
      int v = g_.bond(bi).other(f.atom);
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        tree_children_[static_cast<std::size_t>(f.atom)].push_back(bi);
        stack.push_back(make_frame(v, bi));
      } else if (!is_back[static_cast<std::size_t>(bi)]) {
        is_back[static_cast<std::size_t>(bi)] = 1;
        ring_bonds_[static_cast<std::size_t>(f.atom)].push_back(bi);
        ring_bonds_[static_cast<std::size_t>(v)].push_back(bi);
      }
    }
  }

  void emit(int u, int via_bond, std::string& out) {
    if (via_bond >= 0) append_bond_text(g_, g_.bond(via_bond), out);
    append_atom_text(g_, u, out);
    // Ring-closure digits next, ordered by partner rank.
    std::vector<std::pair<int, int>> digits;  // (partner rank, bond idx)
    for (int bi : ring_bonds_[static_cast<std::size_t>(u)]) {
      int v = g_.bond(bi).other(u);
      digits.push_back({ranks_[static_cast<std::size_t>(v)], bi});
    }
    std::sort(digits.begin(), digits.end());
    for (auto [rank, bi] : digits) {
      int& d = bond_digit_[static_cast<std::size_t>(bi)];
      if (d == 0) {
        d = next_digit_++;
        if (d > 99) raise(Errc::kSmilesSyntax, "ring closure digits exhausted");
        append_bond_text(g_, g_.bond(bi), out);
      }
      append_digit(d, out);
    }
    const auto& kids = tree_children_[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int bi = kids[k];
      int v = g_.bond(bi).other(u);
      if (k + 1 < kids.size()) {
        out += '(';
        emit(v, bi, out);
        out += ')';
      } else {
        emit(v, bi, out);
      }
    }
  }

  static void append_digit(int d, std::string& out) {
    if (d < 10) {
      out += static_cast<char>('0' + d);
    } else {
      out += '%';
      out += static_cast<char>('0' + d / 10);
      out += static_cast<char>('0' + d % 10);
    }
  }

  const MoleculeGraph& g_;
  const std::vector<int>& ranks_;
  std::vector<int> bond_digit_;
  std::vector<std::vector<int>> tree_children_;
  std::vector<std::vector<int>> ring_bonds_;
  int next_digit_ = 1;
};

inline std::vector<int> compact_ranks(const std::vector<int>& sparse) {
  std::vector<std::pair<int, int>> order;
  order.reserve(sparse.size());
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    order.push_back({sparse[i], static_cast<int>(i)});
  }
  std::sort(order.begin(), order.end());
  std::vector<int> dense(sparse.size());
  int rank = -1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || order[k].first != order[k - 1].first) ++rank;
    dense[static_cast<std::size_t>(order[k].second)] = rank;
  }
  return dense;
}

// Symmetry ties that survive refinement are resolved exhaustively: promote
// each member of the lowest tied class in turn, re-refine, recurse, and
// keep the lexicographically smallest emitted string. The candidate set is
// a graph invariant, so the minimum is permutation independent.
inline std::string min_string(const MoleculeGraph& g,
                              const std::vector<int>& ranks) {
  const int n = g.num_atoms();
  int classes = 0;
  for (int r : ranks) classes = std::max(classes, r + 1);
  if (classes == n) return SmilesWriter(g, ranks).write();
  std::vector<int> count(static_cast<std::size_t>(classes), 0);
  for (int r : ranks) ++count[static_cast<std::size_t>(r)];
  int target = 0;
  while (count[static_cast<std::size_t>(target)] <= 1) ++target;
  std::string best;
  for (int i = 0; i < n; ++i) {
    if (ranks[static_cast<std::size_t>(i)] != target) continue;
    std::vector<int> bumped(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      int r2 = ranks[static_cast<std::size_t>(j)] * 2;
      if (ranks[static_cast<std::size_t>(j)] == target && j != i) r2 += 1;
      bumped[static_cast<std::size_t>(j)] = r2;
    }
    std::string s = min_string(g, refine_ranks(g, compact_ranks(bumped)));
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

}  // namespace detail

// Invariant under atom reordering; a fixed point under re-parse. The empty
// graph canonicalizes to "" (the empty-scaffold sentinel).
inline std::string canonical_smiles(const MoleculeGraph& g) {
  if (g.num_atoms() == 0) return "";
  if (!g.connected()) {
    raise(Errc::kSmilesSyntax, "cannot canonicalize a disconnected graph");
  }
  return detail::min_string(g, detail::refine_ranks(g, detail::initial_ranks(g)));
}

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_CANONICAL_HPP
