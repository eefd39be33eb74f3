//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_FRAG_FRAGMENT_HPP
#define CLIFFMASK_FRAG_FRAGMENT_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cliffmask/chem/canonical.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/frag/rules.hpp"

namespace cliffmask::frag {

// Acyclic single bonds whose endpoint environments satisfy some rule.
inline std::vector<int> cleavable_bonds(const chem::MoleculeGraph& g,
                                        const CleavageRuleTable& rules) {
  std::vector<int> out;
  const auto& ring = g.ring_info();
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    if (g.bond(bi).order != chem::BondOrder::kSingle) continue;
    if (ring.bond_in_ring[static_cast<std::size_t>(bi)]) continue;
    if (rules.matches_bond(g, bi)) out.push_back(bi);
  }
  return out;
}

struct FragmentOccurrence {
  std::vector<int> atoms;       // parent-molecule atom indices, ascending
  std::vector<int> bonds;       // parent bond indices with both ends inside
  std::string canonical;        // bare fragment, attachment points dropped
  int label = -1;               // motif vocab id once assigned
};

// Deletes every cleavable bond and returns the heavy-atom components.
// Severed valences are refilled with hydrogens, so the identity string is
// the bare fragment's canonical SMILES.
inline std::vector<FragmentOccurrence> fragment(
    const chem::MoleculeGraph& g, const CleavageRuleTable& rules) {
  std::vector<int> cuts = cleavable_bonds(g, rules);
  std::vector<char> cut(static_cast<std::size_t>(g.num_bonds()), 0);
  for (int bi : cuts) cut[static_cast<std::size_t>(bi)] = 1;

  const int n = g.num_atoms();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int ncomp = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<std::size_t>(start)] != -1) continue;
    std::vector<int> stack{start};
    comp[static_cast<std::size_t>(start)] = ncomp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, bi] : g.neighbors(u)) {
        if (cut[static_cast<std::size_t>(bi)]) continue;
        if (comp[static_cast<std::size_t>(v)] == -1) {
          comp[static_cast<std::size_t>(v)] = ncomp;
          stack.push_back(v);
        }
      }
    }
    ++ncomp;
  }

  std::vector<FragmentOccurrence> out(static_cast<std::size_t>(ncomp));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])]
        .atoms.push_back(i);
  }
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    if (cut[static_cast<std::size_t>(bi)]) continue;
    out[static_cast<std::size_t>(
            comp[static_cast<std::size_t>(g.bond(bi).a)])]
        .bonds.push_back(bi);
  }
  for (FragmentOccurrence& occ : out) {
    chem::MoleculeGraph sub = g.subgraph(occ.atoms);
    // hydrogen refill: every severed bond was single
    for (std::size_t k = 0; k < occ.atoms.size(); ++k) {
      int severed = 0;
      for (auto [v, bi] : g.neighbors(occ.atoms[k])) {
        if (cut[static_cast<std::size_t>(bi)]) ++severed;
      }
      sub.atom(static_cast<int>(k)).hcount += severed;
    }
    occ.canonical = chem::canonical_smiles(sub);
  }
  return out;
}

class MotifVocab {
 public:
  struct Entry {
    std::string smiles;
    long long count = 0;
  };

  static MotifVocab build(const std::vector<chem::MoleculeGraph>& corpus,
                          const CleavageRuleTable& rules, int k = 200,
                          int min_atoms = 3) {
    if (corpus.empty()) {
      raise(Errc::kEmptyCorpus, "motif vocab needs molecules");
    }
    std::map<std::string, long long> counts;
    for (const chem::MoleculeGraph& g : corpus) {
      for (const FragmentOccurrence& occ : fragment(g, rules)) {
        if (static_cast<int>(occ.atoms.size()) < min_atoms) continue;
        counts[occ.canonical] += 1;
      }
    }
    std::vector<std::pair<std::string, long long>> order(counts.begin(),
                                                         counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    MotifVocab v;
    for (const auto& [smi, count] : order) {
      if (static_cast<int>(v.entries_.size()) >= k) break;
      v.index_[smi] = static_cast<int>(v.entries_.size());
      v.entries_.push_back({smi, count});
    }
    return v;
  }

  int size() const { return static_cast<int>(entries_.size()); }
  const Entry& entry(int label) const {
    return entries_[static_cast<std::size_t>(label)];
  }

  int label_of(const std::string& canonical) const {
    auto it = index_.find(canonical);
    return it == index_.end() ? -1 : it->second;
  }

  void save_csv(const std::string& path) const {
    CsvTable t;
    t.header = {"label_id", "canonical_smiles", "count"};
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      t.rows.push_back({std::to_string(i), entries_[i].smiles,
                        std::to_string(entries_[i].count)});
    }
    write_csv(path, t);
  }

  static MotifVocab load_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci = t.require_column("label_id");
    int cs = t.require_column("canonical_smiles");
    int cc = t.require_column("count");
    MotifVocab v;
    for (const auto& row : t.rows) {
      int id = std::stoi(row[static_cast<std::size_t>(ci)]);
      if (id != static_cast<int>(v.entries_.size())) {
        raise(Errc::kConfigInvalid, "motif vocab label ids must be dense");
      }
      v.index_[row[static_cast<std::size_t>(cs)]] = id;
      v.entries_.push_back({row[static_cast<std::size_t>(cs)],
                            std::stoll(row[static_cast<std::size_t>(cc)])});
    }
    return v;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Keeps molecules with at least one in-vocab fragment occurrence. Returns
// indices into the corpus so callers can keep parallel metadata aligned.
inline std::vector<int> filter_corpus_by_vocab(
    const std::vector<chem::MoleculeGraph>& corpus,
    const CleavageRuleTable& rules, const MotifVocab& vocab) {
  std::vector<int> keep;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const FragmentOccurrence& occ : fragment(corpus[i], rules)) {
      if (vocab.label_of(occ.canonical) >= 0) {
        keep.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  return keep;
}

}  // namespace cliffmask::frag

#endif  // CLIFFMASK_FRAG_FRAGMENT_HPP
