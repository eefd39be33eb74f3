//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_EMBED_HPP
#define CLIFFMASK_MODEL_EMBED_HPP

#include <string>
#include <vector>

#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/strings.hpp"
#include "cliffmask/model/vit.hpp"

namespace cliffmask::model {

// cls features for a batch of images, row per input, deterministic.
template <typename T>
inline std::vector<std::vector<double>> embed_features(
    VitModel<T>& m, const std::vector<std::vector<T>>& images) {
  std::vector<std::vector<double>> rows;
  rows.reserve(images.size());
  ForwardCache<T> cache;
  int d = m.config().embed_dim;
  for (const std::vector<T>& px : images) {
    m.forward(px, cache);
    const T* cls = m.cls_feature(cache);
    std::vector<double> row(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      row[static_cast<std::size_t>(k)] = static_cast<double>(cls[k]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_embeddings_csv(
    const std::string& path, const std::vector<std::string>& ids,
    const std::vector<std::vector<double>>& features) {
  if (ids.size() != features.size()) {
    raise(Errc::kLengthMismatch, "ids/features length mismatch");
  }
  CsvTable t;
  t.header = {"id"};
  std::size_t d = features.empty() ? 0 : features[0].size();
  for (std::size_t k = 0; k < d; ++k) {
    t.header.push_back("f" + std::to_string(k + 1));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (features[i].size() != d) {
      raise(Errc::kLengthMismatch, "ragged feature rows");
    }
    std::vector<std::string> row = {ids[i]};
    for (double v : features[i]) row.push_back(fmt_double(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_EMBED_HPP
