//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_LOSSES_HPP
#define CLIFFMASK_MODEL_LOSSES_HPP

#include <cmath>
#include <vector>

#include "cliffmask/core/error.hpp"
#include "cliffmask/model/vit.hpp"

namespace cliffmask::model {

// Stable softmax cross-entropy; fills dlogits (softmax - onehot) if given.
template <typename T>
inline double softmax_ce(const std::vector<T>& logits, int label,
                         std::vector<T>* dlogits = nullptr) {
  int k = static_cast<int>(logits.size());
  if (label < 0 || label >= k) {
    raise(Errc::kLabelOutOfRange, "label " + std::to_string(label) +
                                      " outside " + std::to_string(k) +
                                      " classes");
  }
  double mx = -1e300;
  for (const T& v : logits) mx = std::max(mx, static_cast<double>(v));
  double denom = 0.0;
  for (const T& v : logits) denom += std::exp(static_cast<double>(v) - mx);
  double log_denom = std::log(denom);
  double loss =
      -(static_cast<double>(logits[static_cast<std::size_t>(label)]) - mx -
        log_denom);
  if (dlogits) {
    dlogits->assign(static_cast<std::size_t>(k), T(0));
    for (int c = 0; c < k; ++c) {
      double p =
          std::exp(static_cast<double>(logits[static_cast<std::size_t>(c)]) -
                   mx - log_denom);
      (*dlogits)[static_cast<std::size_t>(c)] =
          static_cast<T>(p - (c == label ? 1.0 : 0.0));
    }
  }
  return loss;
}

namespace detail {

// Per-sample masked-patch CE: mean over the sample's masked patches.
template <typename T>
inline double patch_ce(const VitModel<T>& m, const ForwardCache<T>& cache,
                       const std::vector<int>& omega,
                       const std::vector<int>& labels, int w_id, int b_id,
                       int k) {
  if (omega.empty()) raise(Errc::kEmptyOmega, "no masked patches");
  if (omega.size() != labels.size()) {
    raise(Errc::kLengthMismatch, "omega/label length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    int pi = omega[i];
    if (pi < 0 || pi >= m.config().num_patches()) {
      raise(Errc::kShapeMismatch, "patch index outside grid");
    }
    std::vector<T> logits =
        m.head_logits(m.patch_feature(cache, pi), w_id, b_id, k);
    acc += softmax_ce(logits, labels[i]);
  }
  return acc / static_cast<double>(omega.size());
}

}  // namespace detail

template <typename T>
inline double loss_ampp(const VitModel<T>& m, const ForwardCache<T>& cache,
                        const std::vector<int>& omega,
                        const std::vector<int>& labels) {
  return detail::patch_ce(m, cache, omega, labels, m.atom_w(), m.atom_b(),
                          m.head_widths().atom);
}

template <typename T>
inline double loss_bmpp(const VitModel<T>& m, const ForwardCache<T>& cache,
                        const std::vector<int>& omega,
                        const std::vector<int>& labels) {
  return detail::patch_ce(m, cache, omega, labels, m.bond_w(), m.bond_b(),
                          m.head_widths().bond);
}

template <typename T>
inline double loss_mmpp(const VitModel<T>& m, const ForwardCache<T>& cache,
                        int label) {
  std::vector<T> logits = m.head_logits(
      m.cls_feature(cache), m.motif_w(), m.motif_b(), m.head_widths().motif);
  return softmax_ce(logits, label);
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_LOSSES_HPP
