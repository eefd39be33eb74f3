//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_RENDER_HPP
#define CLIFFMASK_DEPICT_RENDER_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cliffmask/chem/elements.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/depict/layout.hpp"
#include "cliffmask/depict/raster.hpp"

namespace cliffmask::depict {

struct RenderConfig {
  int width = 224;
  int height = 224;
  double fill_fraction = 0.85;   // molecule bbox as share of the short side
  double max_px_per_unit = 64.0;
  double margin_units = 0.55;    // room for discs and glyphs past the bbox
  int stroke_px = 2;
  double highlight_atom_radius = 0.30;    // units
  double highlight_bond_halfwidth = 0.18; // units
  double inner_circle_fraction = 0.55;    // of the ring apothem
  int glyph_scale = 2;
};

// A contiguous piece of the molecule to paint green: one atom, one bond,
// or a motif (its atoms plus its internal bonds).
struct HighlightTarget {
  std::vector<int> atoms;
  std::vector<int> bonds;
};

struct RenderResult {
  RasterImage image;
  // One bitmap per highlight target: every pixel its green layer touched.
  std::vector<Bitmap> painted;
};

namespace detail {

struct PxTransform {
  double scale = 1.0;
  double ox = 0.0, oy = 0.0;  // molecule-space center
  double ix = 0.0, iy = 0.0;  // image-space center

  double px(double x) const { return ix + (x - ox) * scale; }
  double py(double y) const { return iy - (y - oy) * scale; }
};

inline PxTransform fit_transform(const Layout& lay, const RenderConfig& cfg) {
  PxTransform t;
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  if (!lay.x.empty()) {
    minx = *std::min_element(lay.x.begin(), lay.x.end());
    maxx = *std::max_element(lay.x.begin(), lay.x.end());
    miny = *std::min_element(lay.y.begin(), lay.y.end());
    maxy = *std::max_element(lay.y.begin(), lay.y.end());
  }
  double span = std::max(maxx - minx, maxy - miny) + 2 * cfg.margin_units;
  double side = static_cast<double>(std::min(cfg.width, cfg.height));
  t.scale = std::min(cfg.max_px_per_unit, cfg.fill_fraction * side / span);
  t.ox = (minx + maxx) / 2;
  t.oy = (miny + maxy) / 2;
  t.ix = cfg.width / 2.0;
  t.iy = cfg.height / 2.0;
  return t;
}

inline std::string atom_label(const chem::Atom& a) {
  if (a.z == 6 && a.formal_charge == 0) return {};
  std::string s(chem::element_symbol(a.z));
  if (a.formal_charge > 0) {
    s += '+';
    if (a.formal_charge > 1) s += std::to_string(a.formal_charge);
  } else if (a.formal_charge < 0) {
    s += '-';
    if (a.formal_charge < -1) s += std::to_string(-a.formal_charge);
  }
  return s;
}

// Parallel-line separation never collapses below a visible gap, so a green
// seam always survives between the strokes of a double or triple bond.
inline double double_line_offset(double scale) {
  return std::max(0.09 * scale, 2.5);
}
inline double triple_line_offset(double scale) {
  return std::max(0.14 * scale, 3.5);
}

// Distance from the bond axis to the outer edge of the outermost stroke.
inline double line_extent(chem::BondOrder order, double scale, int stroke_px) {
  double hw = stroke_px / 2.0;
  switch (order) {
    case chem::BondOrder::kDouble:
      return double_line_offset(scale) + hw;
    case chem::BondOrder::kTriple:
      return triple_line_offset(scale) + hw;
    default:
      return hw;
  }
}

inline void draw_bond_lines(RasterImage& img, double x0, double y0, double x1,
                            double y1, chem::BondOrder order, double scale,
                            int stroke_px) {
  double hw = stroke_px / 2.0;
  double dx = x1 - x0, dy = y1 - y0;
  double len = std::hypot(dx, dy);
  if (len < 1e-9) return;
  double nx = -dy / len, ny = dx / len;
  auto line_at = [&](double off) {
    paint_capsule(img, x0 + nx * off, y0 + ny * off, x1 + nx * off,
                  y1 + ny * off, hw, kBlack);
  };
  switch (order) {
    case chem::BondOrder::kDouble: {
      double off = double_line_offset(scale);
      line_at(off);
      line_at(-off);
      break;
    }
    case chem::BondOrder::kTriple: {
      double off = triple_line_offset(scale);
      line_at(0);
      line_at(off);
      line_at(-off);
      break;
    }
    default:
      line_at(0);
      break;
  }
}

}  // namespace detail

// Draws the molecule onto a white canvas: black bonds, aromatic-ring
// circles, and heteroatom glyphs, then a translucent green layer per
// highlight target (linework under a highlight shows as kGreenShade).
inline RenderResult render(const chem::MoleculeGraph& g, const Layout& lay,
                           const RenderConfig& cfg = {},
                           const std::vector<HighlightTarget>* highlights =
                               nullptr) {
  if (lay.size() != static_cast<std::size_t>(g.num_atoms())) {
    raise(Errc::kDimensionMismatch, "layout size does not match atom count");
  }
  RenderResult out;
  out.image = RasterImage(cfg.width, cfg.height, kWhite);
  detail::PxTransform t = detail::fit_transform(lay, cfg);

  auto ax = [&](int i) { return t.px(lay.x[static_cast<std::size_t>(i)]); };
  auto ay = [&](int i) { return t.py(lay.y[static_cast<std::size_t>(i)]); };

  std::vector<std::string> labels(static_cast<std::size_t>(g.num_atoms()));
  for (int i = 0; i < g.num_atoms(); ++i) {
    labels[static_cast<std::size_t>(i)] = detail::atom_label(g.atom(i));
  }

  // Bonds, trimmed back where a glyph will sit.
  double trim_px = 5.5 * cfg.glyph_scale;
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    const auto& b = g.bond(bi);
    double x0 = ax(b.a), y0 = ay(b.a), x1 = ax(b.b), y1 = ay(b.b);
    double len = std::hypot(x1 - x0, y1 - y0);
    if (len < 1e-9) continue;
    double ux = (x1 - x0) / len, uy = (y1 - y0) / len;
    double t0 = labels[static_cast<std::size_t>(b.a)].empty()
                    ? 0.0
                    : std::min(trim_px, 0.35 * len);
    double t1 = labels[static_cast<std::size_t>(b.b)].empty()
                    ? 0.0
                    : std::min(trim_px, 0.35 * len);
    detail::draw_bond_lines(out.image, x0 + ux * t0, y0 + uy * t0,
                            x1 - ux * t1, y1 - uy * t1, b.order, t.scale,
                            cfg.stroke_px);
  }

  // One inner circle per fully aromatic ring.
  const chem::RingInfo& ri = g.ring_info();
  for (const std::vector<int>& ring : ri.rings) {
    bool aromatic = true;
    for (std::size_t i = 0; i < ring.size() && aromatic; ++i) {
      int a = ring[i], b = ring[(i + 1) % ring.size()];
      int bi = g.find_bond(a, b);
      aromatic = bi >= 0 && g.bond(bi).order == chem::BondOrder::kAromatic;
    }
    if (!aromatic) continue;
    double cx = 0, cy = 0;
    for (int a : ring) {
      cx += ax(a);
      cy += ay(a);
    }
    cx /= static_cast<double>(ring.size());
    cy /= static_cast<double>(ring.size());
    double apothem = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = ring[i], b = ring[(i + 1) % ring.size()];
      double mx = (ax(a) + ax(b)) / 2, my = (ay(a) + ay(b)) / 2;
      apothem += std::hypot(mx - cx, my - cy);
    }
    apothem /= static_cast<double>(ring.size());
    draw_circle_outline(out.image, cx, cy, cfg.inner_circle_fraction * apothem,
                        cfg.stroke_px, kBlack);
  }

  for (int i = 0; i < g.num_atoms(); ++i) {
    const std::string& label = labels[static_cast<std::size_t>(i)];
    if (label.empty()) continue;
    draw_text_centered(out.image, label, ax(i), ay(i), cfg.glyph_scale,
                       kBlack);
  }

  if (highlights) {
    double disc_r = std::max(4.0, cfg.highlight_atom_radius * t.scale);
    double cap_hw = std::max(2.5, cfg.highlight_bond_halfwidth * t.scale);
    // A highlight swallows whatever it decorates: the glyph box at a
    // labeled atom, the outermost stroke of a multi-line bond.
    auto atom_r = [&](int a) {
      const std::string& lab = labels[static_cast<std::size_t>(a)];
      if (lab.empty()) return disc_r;
      double hw = (6.0 * static_cast<double>(lab.size()) - 1.0) *
                  cfg.glyph_scale / 2.0;
      double hh = 7.0 * cfg.glyph_scale / 2.0;
      return std::max(disc_r, std::hypot(hw, hh) + 1.0);
    };
    for (const HighlightTarget& h : *highlights) {
      Bitmap rec(cfg.width, cfg.height);
      for (int a : h.atoms) {
        paint_disc(out.image, ax(a), ay(a), atom_r(a), kGreen, &rec,
                   &kGreenShade);
      }
      for (int bi : h.bonds) {
        const auto& b = g.bond(bi);
        double hw = std::max(
            cap_hw,
            detail::line_extent(b.order, t.scale, cfg.stroke_px) + 2.5);
        paint_capsule(out.image, ax(b.a), ay(b.a), ax(b.b), ay(b.b), hw,
                      kGreen, &rec, &kGreenShade);
        for (int a : {b.a, b.b}) {
          if (!labels[static_cast<std::size_t>(a)].empty()) {
            paint_disc(out.image, ax(a), ay(a), atom_r(a), kGreen, &rec,
                       &kGreenShade);
          }
        }
      }
      out.painted.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_RENDER_HPP
