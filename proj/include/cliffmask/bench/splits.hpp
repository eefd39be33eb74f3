//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_BENCH_SPLITS_HPP
#define CLIFFMASK_BENCH_SPLITS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cliffmask/bench/potency.hpp"
#include "cliffmask/chem/canonical.hpp"
#include "cliffmask/chem/fingerprint.hpp"
#include "cliffmask/chem/scaffold.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/rng.hpp"

namespace cliffmask::bench {

enum class SplitKind { kStratifiedCluster, kScaffold, kRandom };

inline const char* split_kind_name(SplitKind k) {
  switch (k) {
    case SplitKind::kStratifiedCluster: return "stratified_cluster";
    case SplitKind::kScaffold: return "scaffold";
    case SplitKind::kRandom: return "random";
  }
  return "?";
}

struct DatasetSplit {
  SplitKind kind = SplitKind::kRandom;
  std::vector<int> train;       // record indices, ascending
  std::vector<int> validation;  // empty for two-way splits
  std::vector<int> test;
};

namespace detail {

inline int round_count(double frac, std::size_t n) {
  return static_cast<int>(
      std::floor(frac * static_cast<double>(n) + 0.5));
}

inline void check_fraction(double f, const char* what) {
  if (!(f > 0.0) || !(f < 1.0)) {
    raise(Errc::kConfigInvalid,
          std::string(what) + " fraction must lie in (0,1)");
  }
}

}  // namespace detail

// Leader clustering: each record joins the first existing cluster whose
// leader fingerprint is at least `threshold` similar, else founds a new
// cluster. Single pass in record order, so assignment is deterministic.
inline std::vector<int> leader_clusters(
    const std::vector<PotencyRecord>& records, double threshold = 0.6) {
  std::vector<int> cluster_of(records.size(), -1);
  std::vector<chem::Fingerprint> leaders;
  std::vector<chem::Fingerprint> fps;
  fps.reserve(records.size());
  for (const PotencyRecord& r : records) fps.push_back(chem::ecfp(r.graph));
  for (std::size_t i = 0; i < records.size(); ++i) {
    int found = -1;
    for (std::size_t c = 0; c < leaders.size(); ++c) {
      if (chem::tanimoto(fps[i], leaders[c]) >= threshold) {
        found = static_cast<int>(c);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(leaders.size());
      leaders.push_back(fps[i]);
    }
    cluster_of[i] = found;
  }
  return cluster_of;
}

// Cluster on ECFP similarity, then split each cluster's cliff and non-cliff
// members independently so the train/test cliff balance survives per cluster.
inline DatasetSplit stratified_cluster_split(
    const std::vector<PotencyRecord>& records,
    const std::vector<char>& is_cliff, double train_frac = 0.8,
    std::uint64_t seed = 0, double cluster_threshold = 0.6) {
  detail::check_fraction(train_frac, "train");
  if (is_cliff.size() != records.size()) {
    raise(Errc::kLengthMismatch, "cliff flags do not match records");
  }
  std::vector<int> cluster_of = leader_clusters(records, cluster_threshold);
  int n_clusters = 0;
  for (int c : cluster_of) n_clusters = std::max(n_clusters, c + 1);

  DatasetSplit out;
  out.kind = SplitKind::kStratifiedCluster;
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<int> strata[2];  // [0] non-cliff, [1] cliff
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (cluster_of[i] == c) {
        strata[is_cliff[i] ? 1 : 0].push_back(static_cast<int>(i));
      }
    }
    for (int s = 0; s < 2; ++s) {
      std::vector<int>& members = strata[s];
      if (members.empty()) continue;
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(c),
                            static_cast<std::uint64_t>(s));
      rng.shuffle(members);
      int n_train = detail::round_count(train_frac, members.size());
      n_train = std::min<int>(n_train, static_cast<int>(members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) {
        (static_cast<int>(k) < n_train ? out.train : out.test)
            .push_back(members[k]);
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// Greedy bin packing of scaffold groups, largest first, into whichever
// partition is furthest below its target share. A scaffold never splits.
inline DatasetSplit scaffold_split(const std::vector<PotencyRecord>& records,
                                   double train_frac = 0.8,
                                   double val_frac = 0.1,
                                   double test_frac = 0.1) {
  double total = train_frac + val_frac + test_frac;
  if (std::abs(total - 1.0) > 1e-9 || train_frac <= 0.0 || val_frac < 0.0 ||
      test_frac < 0.0) {
    raise(Errc::kConfigInvalid, "scaffold split fractions must sum to 1");
  }
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string key =
        chem::canonical_smiles(chem::murcko_scaffold(records[i].graph));
    groups[key].push_back(static_cast<int>(i));
  }
  std::vector<std::pair<std::string, std::vector<int>>> ordered(
      groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second.size() != b.second.size()) {
                       return a.second.size() > b.second.size();
                     }
                     return a.first < b.first;
                   });

  DatasetSplit out;
  out.kind = SplitKind::kScaffold;
  std::vector<int>* parts[3] = {&out.train, &out.validation, &out.test};
  double fracs[3] = {train_frac, val_frac, test_frac};
  double n_total = static_cast<double>(records.size());
  for (const auto& [key, members] : ordered) {
    int best = 0;
    double best_deficit = -1e300;
    for (int p = 0; p < 3; ++p) {
      if (fracs[p] <= 0.0) continue;
      double deficit =
          fracs[p] * n_total - static_cast<double>(parts[p]->size());
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = p;
      }
    }
    parts[best]->insert(parts[best]->end(), members.begin(), members.end());
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

inline DatasetSplit random_split(std::size_t n, double train_frac,
                                 double val_frac, double test_frac,
                                 std::uint64_t seed) {
  double total = train_frac + val_frac + test_frac;
  if (std::abs(total - 1.0) > 1e-9 || train_frac <= 0.0 || val_frac < 0.0 ||
      test_frac < 0.0) {
    raise(Errc::kConfigInvalid, "random split fractions must sum to 1");
  }
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  int n_train = detail::round_count(train_frac, n);
  int n_val = detail::round_count(val_frac, n);
  n_train = std::min<int>(n_train, static_cast<int>(n));
  n_val = std::min<int>(n_val, static_cast<int>(n) - n_train);
  DatasetSplit out;
  out.kind = SplitKind::kRandom;
  for (std::size_t k = 0; k < n; ++k) {
    int idx = order[k];
    if (static_cast<int>(k) < n_train) {
      out.train.push_back(idx);
    } else if (static_cast<int>(k) < n_train + n_val) {
      out.validation.push_back(idx);
    } else {
      out.test.push_back(idx);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline void write_split_csv(const std::string& path,
                            const std::vector<PotencyRecord>& records,
                            const DatasetSplit& split) {
  CsvTable t;
  t.header = {"id", "partition"};
  auto emit = [&](const std::vector<int>& part, const char* name) {
    for (int i : part) {
      t.rows.push_back({records[static_cast<std::size_t>(i)].id, name});
    }
  };
  emit(split.train, "train");
  emit(split.validation, "validation");
  emit(split.test, "test");
  write_csv(path, t);
}

inline DatasetSplit read_split_csv(const std::string& path,
                                   const std::vector<PotencyRecord>& records) {
  CsvTable t = read_csv(path);
  int id_col = t.require_column("id");
  int part_col = t.require_column("partition");
  std::map<std::string, int> index_of;
  for (std::size_t i = 0; i < records.size(); ++i) {
    index_of[records[i].id] = static_cast<int>(i);
  }
  DatasetSplit out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto it = index_of.find(row[static_cast<std::size_t>(id_col)]);
    if (it == index_of.end()) {
      raise(Errc::kIoError,
            "split references unknown id '" +
                row[static_cast<std::size_t>(id_col)] + "'");
    }
    const std::string& part = row[static_cast<std::size_t>(part_col)];
    if (part == "train") {
      out.train.push_back(it->second);
    } else if (part == "validation") {
      out.validation.push_back(it->second);
    } else if (part == "test") {
      out.test.push_back(it->second);
    } else {
      raise(Errc::kIoError, "unknown partition '" + part + "'");
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace cliffmask::bench

#endif  // CLIFFMASK_BENCH_SPLITS_HPP
