//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_MASK_HPP
#define CLIFFMASK_DEPICT_MASK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cliffmask/chem/atom_vocab.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/core/rng.hpp"
#include "cliffmask/frag/fragment.hpp"
#include "cliffmask/depict/raster.hpp"
#include "cliffmask/depict/render.hpp"

namespace cliffmask::depict {

enum class MaskLevel { kAtom = 0, kBond = 1, kMotif = 2 };

inline const char* mask_level_name(MaskLevel lv) {
  switch (lv) {
    case MaskLevel::kAtom: return "ampp";
    case MaskLevel::kBond: return "bmpp";
    case MaskLevel::kMotif: return "mmpp";
  }
  return "?";
}

// ---- highlight extraction -----------------------------------------------

struct Hsv {
  double h = 0;  // degrees, [0, 360)
  double s = 0;
  double v = 0;
};

inline Hsv rgb_to_hsv(Color c) {
  double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  double mx = std::max({r, g, b});
  double mn = std::min({r, g, b});
  double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0 ? d / mx : 0.0;
  if (d > 0) {
    if (mx == r) {
      out.h = 60.0 * std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
      out.h = 60.0 * ((b - r) / d + 2.0);
    } else {
      out.h = 60.0 * ((r - g) / d + 4.0);
    }
    if (out.h < 0) out.h += 360.0;
  }
  return out;
}

struct HsvGate {
  double hue_lo = 90.0;
  double hue_hi = 150.0;
  double sat_min = 0.4;
  double val_min = 0.4;

  bool pass(Color c) const {
    Hsv h = rgb_to_hsv(c);
    return h.h >= hue_lo && h.h <= hue_hi && h.s >= sat_min && h.v >= val_min;
  }
};

// Green-highlight detector: HSV gate, then Euclidean dilation.
inline Bitmap extract_green_mask(const RasterImage& img, int dilation = 2,
                                 const HsvGate& gate = {}) {
  Bitmap raw(img.width, img.height);
  bool any = false;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (gate.pass(img.get(x, y))) {
        raw.set(x, y);
        any = true;
      }
    }
  }
  if (!any) raise(Errc::kEmptyMask, "no highlight pixels found");
  return raw.dilated(dilation);
}

// Whitens every pixel covered by any of the masks.
inline RasterImage apply_masks(const RasterImage& img,
                               const std::vector<Bitmap>& masks) {
  RasterImage out = img;
  for (const Bitmap& m : masks) {
    if (m.width != img.width || m.height != img.height) {
      raise(Errc::kDimensionMismatch, "mask does not match image size");
    }
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (m.get(x, y)) out.set(x, y, kWhite);
      }
    }
  }
  return out;
}

// ---- maskable targets ----------------------------------------------------

struct MaskTargetSpec {
  HighlightTarget region;
  int label = -1;
};

inline std::vector<MaskTargetSpec> build_atom_targets(
    const chem::MoleculeGraph& g, const chem::AtomVocab& vocab) {
  std::vector<MaskTargetSpec> out;
  for (int i = 0; i < g.num_atoms(); ++i) {
    int label = vocab.label_of(g.atom(i).z);
    if (label < 0) continue;
    MaskTargetSpec t;
    t.region.atoms = {i};
    t.label = label;
    out.push_back(std::move(t));
  }
  if (out.empty()) {
    raise(Errc::kNoMaskableTargets, "no atoms in the element vocabulary");
  }
  return out;
}

inline int bond_class(chem::BondOrder order) {
  switch (order) {
    case chem::BondOrder::kSingle: return 0;
    case chem::BondOrder::kDouble: return 1;
    case chem::BondOrder::kTriple: return 2;
    case chem::BondOrder::kAromatic: return 3;
  }
  return 0;
}

inline constexpr int kBondClassCount = 4;

inline std::vector<MaskTargetSpec> build_bond_targets(
    const chem::MoleculeGraph& g) {
  std::vector<MaskTargetSpec> out;
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    MaskTargetSpec t;
    t.region.bonds = {bi};
    t.label = bond_class(g.bond(bi).order);
    out.push_back(std::move(t));
  }
  if (out.empty()) {
    raise(Errc::kNoMaskableTargets, "molecule has no bonds");
  }
  return out;
}

inline std::vector<MaskTargetSpec> build_motif_targets(
    const chem::MoleculeGraph& g, const frag::CleavageRuleTable& rules,
    const frag::MotifVocab& vocab) {
  std::vector<MaskTargetSpec> out;
  for (const frag::FragmentOccurrence& occ : frag::fragment(g, rules)) {
    int label = vocab.label_of(occ.canonical);
    if (label < 0) continue;
    MaskTargetSpec t;
    t.region.atoms = occ.atoms;
    t.region.bonds = occ.bonds;
    t.label = label;
    out.push_back(std::move(t));
  }
  if (out.empty()) {
    raise(Errc::kNoMaskableTargets, "no fragment is in the motif vocabulary");
  }
  return out;
}

// ---- sampling ------------------------------------------------------------

// Mask count for a ratio gamma over n targets: round-half-up, at least one.
inline std::size_t mask_count(double gamma, std::size_t n) {
  if (!(gamma > 0.0) || gamma > 1.0) {
    raise(Errc::kConfigInvalid, "gamma must lie in (0, 1]");
  }
  auto m = static_cast<std::size_t>(
      std::floor(gamma * static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(m, 1, n);
}

// Picks which targets to mask; motif tasks always mask exactly one.
inline std::vector<std::size_t> sample_mask_indices(std::size_t n_targets,
                                                    double gamma,
                                                    MaskLevel level,
                                                    Rng& rng) {
  if (n_targets == 0) {
    raise(Errc::kNoMaskableTargets, "cannot sample from zero targets");
  }
  std::size_t m = level == MaskLevel::kMotif ? 1 : mask_count(gamma, n_targets);
  std::vector<std::size_t> idx =
      rng.sample_without_replacement(n_targets, m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// ---- patch bookkeeping ----------------------------------------------------

struct PatchAssignment {
  std::vector<int> omega;   // patch indices, row-major, ascending
  std::vector<int> labels;  // parallel to omega
};

// Patches touched by the extracted mask, each labeled by the target that
// contributes the most of its pixels (ties break toward the lower target
// index). Per-target bitmaps come from the renderer's paint records.
inline PatchAssignment assign_patches(const Bitmap& extracted,
                                      const std::vector<Bitmap>& target_masks,
                                      const std::vector<int>& target_labels,
                                      int patch_size) {
  if (patch_size <= 0 || extracted.width % patch_size != 0 ||
      extracted.height % patch_size != 0) {
    raise(Errc::kDimensionMismatch, "image size not divisible by patch size");
  }
  if (target_masks.size() != target_labels.size()) {
    raise(Errc::kLengthMismatch, "one label per target mask required");
  }
  int nx = extracted.width / patch_size;
  int ny = extracted.height / patch_size;
  PatchAssignment out;
  for (int py = 0; py < ny; ++py) {
    for (int px = 0; px < nx; ++px) {
      long long total = 0;
      std::vector<long long> per(target_masks.size(), 0);
      for (int y = py * patch_size; y < (py + 1) * patch_size; ++y) {
        for (int x = px * patch_size; x < (px + 1) * patch_size; ++x) {
          if (!extracted.get(x, y)) continue;
          ++total;
          for (std::size_t t = 0; t < target_masks.size(); ++t) {
            if (target_masks[t].get(x, y)) ++per[t];
          }
        }
      }
      if (total == 0) continue;
      std::size_t best = 0;
      for (std::size_t t = 1; t < per.size(); ++t) {
        if (per[t] > per[best]) best = t;
      }
      out.omega.push_back(py * nx + px);
      out.labels.push_back(target_labels[best]);
    }
  }
  return out;
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_MASK_HPP
