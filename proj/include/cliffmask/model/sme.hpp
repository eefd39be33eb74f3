//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_SME_HPP
#define CLIFFMASK_MODEL_SME_HPP

#include <vector>

#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/depict/layout.hpp"
#include "cliffmask/depict/mask.hpp"
#include "cliffmask/depict/render.hpp"
#include "cliffmask/model/train.hpp"
#include "cliffmask/model/vit.hpp"

namespace cliffmask::model {

// Attribution of a pixel region: f(x) - f(x with the region whitened).
// Identical buffers run through the identical forward pass, so an
// empty-effect mask yields exactly zero.
template <typename T>
inline double sme_attribution_masked(VitModel<T>& m,
                                     const depict::RasterImage& image,
                                     const depict::Bitmap& effect) {
  depict::RasterImage erased = image;
  if (effect.count() > 0) {
    depict::apply_masks(erased, {effect});
  }
  ForwardCache<T> cache;
  m.forward(normalize_image<T>(image), cache);
  double fx = static_cast<double>(m.predict(cache));
  m.forward(normalize_image<T>(erased), cache);
  double fx_sub = static_cast<double>(m.predict(cache));
  return fx - fx_sub;
}

// Substructure attribution: renders the molecule, highlights the given
// atoms/bonds with the same geometry the motif masks use, whitens the
// extracted region and differences the two predictions.
template <typename T>
inline double sme_attribution(VitModel<T>& m, const chem::MoleculeGraph& g,
                              const depict::HighlightTarget& substructure,
                              int dilation = 2) {
  if (substructure.atoms.empty() && substructure.bonds.empty()) {
    raise(Errc::kEmptySubstructure, "substructure selects nothing");
  }
  for (int a : substructure.atoms) {
    if (a < 0 || a >= g.num_atoms()) {
      raise(Errc::kEmptySubstructure, "atom index out of range");
    }
  }
  for (int b : substructure.bonds) {
    if (b < 0 || b >= g.num_bonds()) {
      raise(Errc::kEmptySubstructure, "bond index out of range");
    }
  }
  depict::RenderConfig rcfg;
  rcfg.width = m.config().image_size;
  rcfg.height = m.config().image_size;

  depict::Layout lay = depict::layout_2d(g);
  std::vector<depict::HighlightTarget> targets = {substructure};
  depict::RenderResult lit = depict::render(g, lay, rcfg, &targets);
  depict::Bitmap effect = depict::extract_green_mask(lit.image, dilation);
  depict::RenderResult clean = depict::render(g, lay, rcfg);
  return sme_attribution_masked(m, clean.image, effect);
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_SME_HPP
