//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CHEM_ATOM_VOCAB_HPP
#define CLIFFMASK_CHEM_ATOM_VOCAB_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cliffmask/chem/elements.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::chem {

// The most frequent heavy-atom elements across a corpus, mapped to dense
// class labels. Ordering: count descending, then symbol ascending.
class AtomVocab {
 public:
  AtomVocab() = default;

  static AtomVocab build(const std::vector<MoleculeGraph>& corpus,
                         int k = 10) {
    if (corpus.empty()) raise(Errc::kEmptyCorpus, "atom vocab needs molecules");
    std::map<std::string, long long> counts;
    for (const MoleculeGraph& g : corpus) {
      for (const Atom& a : g.atoms()) {
        counts[std::string(element_symbol(a.z))] += 1;
      }
    }
    std::vector<std::pair<std::string, long long>> order(counts.begin(),
                                                         counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    AtomVocab v;
    for (const auto& [sym, count] : order) {
      if (static_cast<int>(v.symbols_.size()) >= k) break;
      v.symbols_.push_back(sym);
      v.counts_.push_back(count);
    }
    return v;
  }

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int label) const {
    return symbols_[static_cast<std::size_t>(label)];
  }
  long long count(int label) const {
    return counts_[static_cast<std::size_t>(label)];
  }

  // -1 when the element is outside the vocabulary.
  int label_of(int z) const {
    std::string_view sym = element_symbol(z);
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i] == sym) return static_cast<int>(i);
    }
    return -1;
  }

  void save_csv(const std::string& path) const {
    CsvTable t;
    t.header = {"label_id", "symbol", "count"};
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      t.rows.push_back(
          {std::to_string(i), symbols_[i], std::to_string(counts_[i])});
    }
    write_csv(path, t);
  }

  static AtomVocab load_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci = t.require_column("label_id");
    int cs = t.require_column("symbol");
    int cc = t.require_column("count");
    AtomVocab v;
    for (const auto& row : t.rows) {
      int id = std::stoi(row[static_cast<std::size_t>(ci)]);
      if (id != static_cast<int>(v.symbols_.size())) {
        raise(Errc::kConfigInvalid, "atom vocab label ids must be dense");
      }
      v.symbols_.push_back(row[static_cast<std::size_t>(cs)]);
      v.counts_.push_back(std::stoll(row[static_cast<std::size_t>(cc)]));
    }
    return v;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<long long> counts_;
};

}  // namespace cliffmask::chem

#endif  // CLIFFMASK_CHEM_ATOM_VOCAB_HPP
