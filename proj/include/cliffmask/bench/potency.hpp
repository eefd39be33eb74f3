//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_BENCH_POTENCY_HPP
#define CLIFFMASK_BENCH_POTENCY_HPP

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "cliffmask/chem/canonical.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/chem/smiles.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/core/strings.hpp"

namespace cliffmask::bench {

struct PotencyRecord {
  std::string id;
  std::string smiles;     // as ingested
  std::string canonical;  // dedupe key
  double pk = 0.0;        // -log10 molar potency
  std::string split_tag;  // optional published split
  chem::MoleculeGraph graph;
};

enum class PotencyUnit {
  kPk,        // value column already on the -log10 molar scale
  kNanomolar  // value column in nM; pk = 9 - log10(value)
};

struct ColumnMap {
  std::string id = "id";          // optional; row number when absent
  std::string smiles = "smiles";
  std::string value = "y";
  std::string split = "split";    // optional
};

struct RejectedRow {
  std::size_t row = 0;  // 1-based data row
  Errc reason = Errc::kUnparsableSmiles;
  std::string smiles;
};

struct IngestResult {
  std::vector<PotencyRecord> records;
  std::vector<RejectedRow> rejects;
};

inline double pk_from_nanomolar(double value_nm) {
  return 9.0 - std::log10(value_nm);
}

// Reads a potency table; bad rows land in `rejects` and the run continues.
// Duplicate canonical SMILES keep their first occurrence.
inline IngestResult ingest(const std::string& csv_path, const ColumnMap& cols,
                           PotencyUnit unit) {
  CsvTable t = read_csv(csv_path);
  int smiles_col = t.require_column(cols.smiles);
  int value_col = t.require_column(cols.value);
  int id_col = t.column(cols.id);
  int split_col = t.column(cols.split);

  IngestResult out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto cell = [&](int c) -> std::string {
      return c >= 0 && c < static_cast<int>(row.size())
                 ? row[static_cast<std::size_t>(c)]
                 : std::string{};
    };
    PotencyRecord rec;
    rec.smiles = cell(smiles_col);
    rec.id = id_col >= 0 ? cell(id_col) : "row" + std::to_string(r + 1);
    rec.split_tag = split_col >= 0 ? cell(split_col) : std::string{};

    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(cell(value_col), &used);
      if (used != cell(value_col).size()) value = std::nan("");
    } catch (const std::exception&) {
      value = std::nan("");
    }
    bool positive_needed = unit == PotencyUnit::kNanomolar;
    if (std::isnan(value) || (positive_needed && value <= 0.0)) {
      out.rejects.push_back({r + 1, Errc::kNonPositivePotency, rec.smiles});
      continue;
    }
    rec.pk = unit == PotencyUnit::kNanomolar ? pk_from_nanomolar(value)
                                             : value;
    if (!std::isfinite(rec.pk)) {
      out.rejects.push_back({r + 1, Errc::kNonPositivePotency, rec.smiles});
      continue;
    }

    try {
      rec.graph = chem::parse_smiles(rec.smiles);
      rec.canonical = chem::canonical_smiles(rec.graph);
    } catch (const Error&) {
      out.rejects.push_back({r + 1, Errc::kUnparsableSmiles, rec.smiles});
      continue;
    }

    if (!seen.insert(rec.canonical).second) continue;  // duplicate
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline void write_rejects_csv(const std::string& path,
                              const std::vector<RejectedRow>& rejects) {
  CsvTable t;
  t.header = {"row", "reason", "smiles"};
  for (const RejectedRow& r : rejects) {
    t.rows.push_back({std::to_string(r.row), std::string(errc_name(r.reason)),
                      r.smiles});
  }
  write_csv(path, t);
}

}  // namespace cliffmask::bench

#endif  // CLIFFMASK_BENCH_POTENCY_HPP
