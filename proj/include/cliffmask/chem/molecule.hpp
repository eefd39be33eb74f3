//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_MOLECULE_HPP
#define CLIFFMASK_CHEM_MOLECULE_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "cliffmask/chem/elements.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution of a bond to the valence sum used for implicit-H fill.
// Aromatic bonds count 1 each; an aromatic atom adds one more on top.
inline int order_code(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    case BondOrder::kAromatic: return 1;
  }
  return 1;
}

struct Atom {
  int z = 6;               // atomic number
  bool aromatic = false;
  int formal_charge = 0;
  int hcount = 0;          // bracket-explicit or valence-inferred hydrogens
  bool bracket = false;    // written with [...] in the source SMILES
};

struct Bond {
  int a = -1;
  int b = -1;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == a ? b : a; }
};

struct RingInfo {
  std::vector<char> atom_in_ring;
  std::vector<char> bond_in_ring;
  // Small rings as ordered atom cycles (each consecutive pair bonded,
  // last closes to first). Every ring bond appears in at least one cycle.
  std::vector<std::vector<int>> rings;
};

class MoleculeGraph {
 public:
  MoleculeGraph() = default;
  MoleculeGraph(const MoleculeGraph& o)
      : atoms_(o.atoms_), bonds_(o.bonds_), adj_(o.adj_) {}
  MoleculeGraph& operator=(const MoleculeGraph& o) {
    if (this != &o) {
      atoms_ = o.atoms_;
      bonds_ = o.bonds_;
      adj_ = o.adj_;
      drop_ring_cache();
    }
    return *this;
  }
  MoleculeGraph(MoleculeGraph&& o) noexcept
      : atoms_(std::move(o.atoms_)),
        bonds_(std::move(o.bonds_)),
        adj_(std::move(o.adj_)),
        rings_(o.rings_.exchange(nullptr)) {}
  MoleculeGraph& operator=(MoleculeGraph&& o) noexcept {
    if (this != &o) {
      atoms_ = std::move(o.atoms_);
      bonds_ = std::move(o.bonds_);
      adj_ = std::move(o.adj_);
      drop_ring_cache();
      rings_.store(o.rings_.exchange(nullptr));
    }
    return *this;
  }
  ~MoleculeGraph() { drop_ring_cache(); }

  int add_atom(Atom a) {
    atoms_.push_back(a);
    adj_.emplace_back();
    drop_ring_cache();
    return static_cast<int>(atoms_.size()) - 1;
  }

  int add_bond(int a, int b, BondOrder order) {
    if (a == b) raise(Errc::kSmilesSyntax, "self-bond rejected");
    if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms()) {
      raise(Errc::kSmilesSyntax, "bond endpoint out of range");
    }
    for (auto [nbr, bi] : adj_[static_cast<std::size_t>(a)]) {
      if (nbr == b) raise(Errc::kSmilesSyntax, "duplicate bond rejected");
    }
    bonds_.push_back({a, b, order});
    int bi = static_cast<int>(bonds_.size()) - 1;
    adj_[static_cast<std::size_t>(a)].push_back({b, bi});
    adj_[static_cast<std::size_t>(b)].push_back({a, bi});
    drop_ring_cache();
    return bi;
  }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  // (neighbor atom index, bond index) pairs in insertion order.
  const std::vector<std::pair<int, int>>& neighbors(int i) const {
    return adj_[static_cast<std::size_t>(i)];
  }

  int degree(int i) const {
    return static_cast<int>(adj_[static_cast<std::size_t>(i)].size());
  }

  int find_bond(int a, int b) const {
    for (auto [nbr, bi] : adj_[static_cast<std::size_t>(a)]) {
      if (nbr == b) return bi;
    }
    return -1;
  }

  bool connected() const {
    if (atoms_.empty()) return true;
    std::vector<char> seen(atoms_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, bi] : adj_[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == num_atoms();
  }

  void validate() const {
    for (const Bond& b : bonds_) {
      if (b.order == BondOrder::kAromatic) {
        if (!atoms_[static_cast<std::size_t>(b.a)].aromatic ||
            !atoms_[static_cast<std::size_t>(b.b)].aromatic) {
          raise(Errc::kSmilesSyntax,
                "aromatic bond endpoint lacks aromatic flag");
        }
      }
    }
  }

  // Lazily computed and cached; concurrent readers race benignly (first
  // publication wins, losers discard their copy). Mutation drops the cache.
  const RingInfo& ring_info() const {
    RingInfo* cur = rings_.load(std::memory_order_acquire);
    if (cur) return *cur;
    auto fresh = std::make_unique<RingInfo>(compute_rings());
    RingInfo* expected = nullptr;
    if (rings_.compare_exchange_strong(expected, fresh.get(),
                                       std::memory_order_acq_rel)) {
      return *fresh.release();
    }
    return *expected;
  }

  // Number of implicit hydrogens a bare organic-subset atom would carry
  // given the bonds currently attached. -1 when no standard valence fits.
  // Aromatic atoms add a pi contribution of 1 when the element donates one
  // pi electron (C/B always; N/P only while 2-connected); lone-pair donors
  // (o, s) add nothing, so thiophene sulfur comes out with zero hydrogens.
  int inferred_hcount(int i) const {
    const Atom& a = atoms_[static_cast<std::size_t>(i)];
    ValenceSet vs = default_valences(a.z);
    if (vs.count == 0) return 0;
    int sum = 0;
    for (auto [nbr, bi] : adj_[static_cast<std::size_t>(i)]) {
      sum += order_code(bonds_[static_cast<std::size_t>(bi)].order);
    }
    if (a.aromatic) {
      if (a.z == 5 || a.z == 6) {
        sum += 1;
      } else if ((a.z == 7 || a.z == 15) && degree(i) <= 2) {
        sum += 1;
      }
    }
    for (int k = 0; k < vs.count; ++k) {
      if (vs.v[static_cast<std::size_t>(k)] >= sum) {
        return vs.v[static_cast<std::size_t>(k)] - sum;
      }
    }
    return -1;
  }

  // Induced subgraph over `keep` (any order); atoms are renumbered by the
  // position in `keep`. Bonds with both endpoints kept survive.
  MoleculeGraph subgraph(const std::vector<int>& keep) const {
    std::vector<int> remap(atoms_.size(), -1);
    MoleculeGraph out;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      remap[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
      out.add_atom(atoms_[static_cast<std::size_t>(keep[i])]);
    }
    for (const Bond& b : bonds_) {
      int na = remap[static_cast<std::size_t>(b.a)];
      int nb = remap[static_cast<std::size_t>(b.b)];
      if (na >= 0 && nb >= 0) out.add_bond(na, nb, b.order);
    }
    return out;
  }

 private:
  RingInfo compute_rings() const {
    RingInfo info;
    std::size_t n = atoms_.size();
    info.atom_in_ring.assign(n, 0);
    info.bond_in_ring.assign(bonds_.size(), 0);
    if (n == 0) return info;

    // Non-bridge edges are exactly the ring bonds (iterative Tarjan).
    std::vector<int> disc(n, -1), low(n, 0), parent_edge(n, -1);
    int timer = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (disc[root] != -1) continue;
      std::vector<std::pair<int, std::size_t>> stack;  // (atom, next nbr slot)
      disc[root] = low[root] = timer++;
      stack.push_back({static_cast<int>(root), 0});
      while (!stack.empty()) {
        auto& [u, slot] = stack.back();
        const auto& nbrs = adj_[static_cast<std::size_t>(u)];
        if (slot < nbrs.size()) {
          auto [v, bi] = nbrs[slot++];
          if (bi == parent_edge[static_cast<std::size_t>(u)]) continue;
          if (disc[static_cast<std::size_t>(v)] == -1) {
            disc[static_cast<std::size_t>(v)] =
                low[static_cast<std::size_t>(v)] = timer++;
            parent_edge[static_cast<std::size_t>(v)] = bi;
            stack.push_back({v, 0});
          } else {
            low[static_cast<std::size_t>(u)] =
                std::min(low[static_cast<std::size_t>(u)],
                         disc[static_cast<std::size_t>(v)]);
            info.bond_in_ring[static_cast<std::size_t>(bi)] = 1;
          }
        } else {
          stack.pop_back();
          if (!stack.empty()) {
            int p = stack.back().first;
            low[static_cast<std::size_t>(p)] =
                std::min(low[static_cast<std::size_t>(p)],
                         low[static_cast<std::size_t>(u)]);
            int pe = parent_edge[static_cast<std::size_t>(u)];
            if (low[static_cast<std::size_t>(u)] <=
                disc[static_cast<std::size_t>(p)]) {
              info.bond_in_ring[static_cast<std::size_t>(pe)] = 1;
            }
          }
        }
      }
    }
    for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
      if (info.bond_in_ring[bi]) {
        info.atom_in_ring[static_cast<std::size_t>(bonds_[bi].a)] = 1;
        info.atom_in_ring[static_cast<std::size_t>(bonds_[bi].b)] = 1;
      }
    }

    // Smallest cycle through each not-yet-covered ring bond, found by BFS
    // in the ring-bond subgraph with the bond itself removed.
    std::vector<char> covered(bonds_.size(), 0);
    for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
      if (!info.bond_in_ring[bi] || covered[bi]) continue;
      std::vector<int> cycle = smallest_cycle_through(static_cast<int>(bi),
                                                      info.bond_in_ring);
      if (cycle.empty()) continue;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        int a = cycle[k];
        int b = cycle[(k + 1) % cycle.size()];
        int eb = find_bond(a, b);
        if (eb >= 0) covered[static_cast<std::size_t>(eb)] = 1;
      }
      info.rings.push_back(std::move(cycle));
    }
    return info;
  }

  std::vector<int> smallest_cycle_through(
      int bond_idx, const std::vector<char>& bond_in_ring) const {
    const Bond& b = bonds_[static_cast<std::size_t>(bond_idx)];
    std::vector<int> prev(atoms_.size(), -1);
    std::vector<char> seen(atoms_.size(), 0);
    std::vector<int> queue{b.a};
    seen[static_cast<std::size_t>(b.a)] = 1;
    std::size_t head = 0;
    while (head < queue.size()) {
      int u = queue[head++];
      if (u == b.b) break;
      for (auto [v, bi] : adj_[static_cast<std::size_t>(u)]) {
        if (bi == bond_idx || !bond_in_ring[static_cast<std::size_t>(bi)]) {
          continue;
        }
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          prev[static_cast<std::size_t>(v)] = u;
          queue.push_back(v);
        }
      }
    }
    if (!seen[static_cast<std::size_t>(b.b)]) return {};
    std::vector<int> path;
    for (int u = b.b; u != -1; u = prev[static_cast<std::size_t>(u)]) {
      path.push_back(u);
    }
    std::reverse(path.begin(), path.end());  // a ... b, closed by bond_idx
    return path;
  }

  void drop_ring_cache() { delete rings_.exchange(nullptr); }

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  mutable std::atomic<RingInfo*> rings_{nullptr};
};

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_MOLECULE_HPP
