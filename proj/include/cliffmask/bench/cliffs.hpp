//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_BENCH_CLIFFS_HPP
#define CLIFFMASK_BENCH_CLIFFS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "cliffmask/bench/potency.hpp"
#include "cliffmask/chem/fingerprint.hpp"
#include "cliffmask/chem/scaffold.hpp"
#include "cliffmask/chem/similarity.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/strings.hpp"

namespace cliffmask::bench {

struct SimilarityTriad {
  double sub = 0.0;   // ECFP Tanimoto
  double scaf = 0.0;  // scaffold ECFP Tanimoto, 0 when a scaffold is empty
  double smi = 0.0;   // 1 - levenshtein / max length, canonical SMILES

  double max() const { return std::max({sub, scaf, smi}); }
};

// Precomputed per-record features so pair mining stays O(n^2) cheap.
struct CliffFeatures {
  chem::Fingerprint fp;
  chem::Fingerprint scaffold_fp;
  bool scaffold_empty = true;
  std::string canonical;
};

inline CliffFeatures cliff_features(const PotencyRecord& r) {
  CliffFeatures f;
  f.fp = chem::ecfp(r.graph);
  chem::MoleculeGraph scaf = chem::murcko_scaffold(r.graph);
  f.scaffold_empty = scaf.num_atoms() == 0;
  if (!f.scaffold_empty) f.scaffold_fp = chem::ecfp(scaf);
  f.canonical = r.canonical.empty() ? chem::canonical_smiles(r.graph)
                                    : r.canonical;
  return f;
}

inline SimilarityTriad similarity_triad(const CliffFeatures& a,
                                        const CliffFeatures& b) {
  SimilarityTriad t;
  t.sub = chem::tanimoto(a.fp, b.fp);
  t.scaf = (a.scaffold_empty || b.scaffold_empty)
               ? 0.0
               : chem::tanimoto(a.scaffold_fp, b.scaffold_fp);
  t.smi = chem::smiles_similarity(a.canonical, b.canonical);
  return t;
}

inline SimilarityTriad similarity_triad(const PotencyRecord& a,
                                        const PotencyRecord& b) {
  return similarity_triad(cliff_features(a), cliff_features(b));
}

struct CliffPair {
  int i = -1;  // record indices, i < j
  int j = -1;
  bool by_sub = false;
  bool by_scaf = false;
  bool by_smi = false;
  double delta_pk = 0.0;

  bool operator==(const CliffPair& o) const {
    return i == o.i && j == o.j && by_sub == o.by_sub &&
           by_scaf == o.by_scaf && by_smi == o.by_smi &&
           delta_pk == o.delta_pk;
  }
};

struct CliffAnalysis {
  std::vector<CliffPair> pairs;     // ordered by (i, j)
  std::vector<char> is_cliff;       // per record: member of >= 1 pair
};

// Similarity above `threshold` (strict) on any criterion plus a potency gap
// of at least `min_delta_pk` makes a cliff. Mining parallelizes over row
// blocks; results merge in block order so output never depends on workers.
inline CliffAnalysis find_cliff_pairs(const std::vector<PotencyRecord>& records,
                                      double threshold = 0.9,
                                      double min_delta_pk = 1.0,
                                      int workers = 1) {
  int n = static_cast<int>(records.size());
  std::vector<CliffFeatures> feats;
  feats.reserve(records.size());
  for (const PotencyRecord& r : records) feats.push_back(cliff_features(r));

  auto scan_rows = [&](int row_begin, int row_end,
                       std::vector<CliffPair>& out) {
    for (int i = row_begin; i < row_end; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double delta =
            std::abs(records[static_cast<std::size_t>(i)].pk -
                     records[static_cast<std::size_t>(j)].pk);
        if (delta < min_delta_pk) continue;
        SimilarityTriad t = similarity_triad(
            feats[static_cast<std::size_t>(i)],
            feats[static_cast<std::size_t>(j)]);
        if (t.max() <= threshold) continue;
        CliffPair p;
        p.i = i;
        p.j = j;
        p.by_sub = t.sub > threshold;
        p.by_scaf = t.scaf > threshold;
        p.by_smi = t.smi > threshold;
        p.delta_pk = delta;
        out.push_back(p);
      }
    }
  };

  CliffAnalysis out;
  if (workers <= 1 || n < 4) {
    scan_rows(0, n, out.pairs);
  } else {
    workers = std::min(workers, n);
    std::vector<std::vector<CliffPair>> blocks(
        static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      int lo = n * w / workers;
      int hi = n * (w + 1) / workers;
      pool.emplace_back(scan_rows, lo, hi,
                        std::ref(blocks[static_cast<std::size_t>(w)]));
    }
    for (std::thread& th : pool) th.join();
    for (const auto& b : blocks) {
      out.pairs.insert(out.pairs.end(), b.begin(), b.end());
    }
  }

  out.is_cliff.assign(records.size(), 0);
  for (const CliffPair& p : out.pairs) {
    out.is_cliff[static_cast<std::size_t>(p.i)] = 1;
    out.is_cliff[static_cast<std::size_t>(p.j)] = 1;
  }
  return out;
}

inline void write_cliff_pairs_csv(const std::string& path,
                                  const std::vector<PotencyRecord>& records,
                                  const std::vector<CliffPair>& pairs) {
  CsvTable t;
  t.header = {"i", "j", "criteria", "delta_pk"};
  for (const CliffPair& p : pairs) {
    std::string criteria;
    if (p.by_sub) criteria += "substructure";
    if (p.by_scaf) criteria += criteria.empty() ? "scaffold" : "|scaffold";
    if (p.by_smi) criteria += criteria.empty() ? "smiles" : "|smiles";
    t.rows.push_back({records[static_cast<std::size_t>(p.i)].id,
                      records[static_cast<std::size_t>(p.j)].id, criteria,
                      fmt_double(p.delta_pk)});
  }
  write_csv(path, t);
}

}  // namespace cliffmask::bench

#endif  // CLIFFMASK_BENCH_CLIFFS_HPP
