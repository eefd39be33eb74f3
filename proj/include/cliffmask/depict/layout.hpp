//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_LAYOUT_HPP
#define CLIFFMASK_DEPICT_LAYOUT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"

namespace cliffmask::depict {

// 2D coordinates in bond-length units (mean bond ~ 1.0).
struct Layout {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t size() const { return x.size(); }
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

inline double ang_diff(double a, double b) {
  double d = std::fmod(a - b, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d < -kPi) d += 2 * kPi;
  return std::abs(d);
}

struct Placer {
  const chem::MoleculeGraph& g;
  const chem::RingInfo& ri;
  Layout lay;
  std::vector<bool> placed;
  std::vector<int> order;  // placement sequence number, for chain parity
  int next_order = 0;
  std::vector<bool> ring_done;

  explicit Placer(const chem::MoleculeGraph& gr)
      : g(gr), ri(gr.ring_info()) {
    std::size_t n = static_cast<std::size_t>(g.num_atoms());
    lay.x.assign(n, 0.0);
    lay.y.assign(n, 0.0);
    placed.assign(n, false);
    order.assign(n, 0);
    ring_done.assign(ri.rings.size(), false);
  }

  double& X(int a) { return lay.x[static_cast<std::size_t>(a)]; }
  double& Y(int a) { return lay.y[static_cast<std::size_t>(a)]; }
  double X(int a) const { return lay.x[static_cast<std::size_t>(a)]; }
  double Y(int a) const { return lay.y[static_cast<std::size_t>(a)]; }
  bool is_placed(int a) const { return placed[static_cast<std::size_t>(a)]; }

  void mark(int a, double px, double py) {
    X(a) = px;
    Y(a) = py;
    placed[static_cast<std::size_t>(a)] = true;
    order[static_cast<std::size_t>(a)] = next_order++;
  }

  std::vector<int> placed_neighbors(int a) const {
    std::vector<int> out;
    for (auto [nbr, bi] : g.neighbors(a)) {
      if (is_placed(nbr)) out.push_back(nbr);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Direction pointing away from what is already drawn around `a`.
  double outward_angle(int a) const {
    std::vector<int> nbrs = placed_neighbors(a);
    if (nbrs.empty()) return 0.0;
    double cx = 0, cy = 0;
    for (int n : nbrs) {
      cx += X(n);
      cy += Y(n);
    }
    cx /= static_cast<double>(nbrs.size());
    cy /= static_cast<double>(nbrs.size());
    double dx = X(a) - cx, dy = Y(a) - cy;
    if (dx * dx + dy * dy < 1e-12) return kPi / 2;
    return std::atan2(dy, dx);
  }

  void place_chain_atom(int u, int v) {
    double base = outward_angle(u);
    std::vector<double> used;
    for (int n : placed_neighbors(u)) {
      used.push_back(std::atan2(Y(n) - Y(u), X(n) - X(u)));
    }
    static const double kOffsets[] = {60,  -60, 0,    120, -120, 30,
                                      -30, 90,  -90,  150, -150, 180};
    bool flip = (order[static_cast<std::size_t>(u)] % 2) != 0;
    double best_angle = base;
    double best_score = -1e9;
    for (double off_deg : kOffsets) {
      double off = (flip ? -off_deg : off_deg) * kPi / 180.0;
      double cand = base + off;
      double mind = 2 * kPi;
      for (double ua : used) mind = std::min(mind, ang_diff(cand, ua));
      // closest to the 120-degree bond angle wins; candidate order breaks
      // ties so chains alternate into a zig-zag
      double score = used.empty() ? -std::abs(off)
                                  : -std::abs(mind - 2 * kPi / 3);
      if (score > best_score + 1e-9) {
        best_score = score;
        best_angle = cand;
      }
    }
    mark(v, X(u) + std::cos(best_angle), Y(u) + std::sin(best_angle));
  }

  // Lays out one ring as a regular polygon with unit sides, anchored on
  // whatever part of it is already placed. Already-placed atoms stay put.
  void place_ring(std::size_t ring_idx, std::vector<int>& newly_placed) {
    const std::vector<int>& ring = ri.rings[ring_idx];
    std::size_t k = ring.size();
    bool any_unplaced = false;
    for (int a : ring) any_unplaced |= !is_placed(a);
    ring_done[ring_idx] = true;
    if (!any_unplaced) return;

    double circum = 0.5 / std::sin(kPi / static_cast<double>(k));
    double apothem = 0.5 / std::tan(kPi / static_cast<double>(k));

    // Fused entry: a placed edge of the ring exists.
    for (std::size_t i = 0; i < k; ++i) {
      int a = ring[i], b = ring[(i + 1) % k];
      if (!is_placed(a) || !is_placed(b)) continue;
      double ax = X(a), ay = Y(a), bx = X(b), by = Y(b);
      double mx = (ax + bx) / 2, my = (ay + by) / 2;
      double ex = bx - ax, ey = by - ay;
      double el = std::hypot(ex, ey);
      if (el < 1e-9) continue;
      double nx = -ey / el, ny = ex / el;
      // Put the new center on the side away from the placed surroundings.
      double refx = 0, refy = 0;
      int refn = 0;
      for (int e : {a, b}) {
        for (int n : placed_neighbors(e)) {
          if (n == a || n == b) continue;
          refx += X(n);
          refy += Y(n);
          ++refn;
        }
      }
      if (refn > 0) {
        refx /= refn;
        refy /= refn;
        if ((refx - mx) * nx + (refy - my) * ny > 0) {
          nx = -nx;
          ny = -ny;
        }
      }
      double cx = mx + apothem * nx, cy = my + apothem * ny;
      double ta = std::atan2(ay - cy, ax - cx);
      double tb = std::atan2(by - cy, bx - cx);
      double step = 2 * kPi / static_cast<double>(k);
      if (ang_diff(ta + step, tb) > ang_diff(ta - step, tb)) step = -step;
      for (std::size_t t = 1; t < k; ++t) {
        int v = ring[(i + t) % k];
        if (is_placed(v)) continue;
        double th = ta + step * static_cast<double>(t);
        mark(v, cx + circum * std::cos(th), cy + circum * std::sin(th));
        newly_placed.push_back(v);
      }
      return;
    }

    // Spiro / substituent entry: anchor on the first placed vertex.
    for (std::size_t i = 0; i < k; ++i) {
      int a = ring[i];
      if (!is_placed(a)) continue;
      double dir = outward_angle(a);
      double cx = X(a) + circum * std::cos(dir);
      double cy = Y(a) + circum * std::sin(dir);
      double ta = std::atan2(Y(a) - cy, X(a) - cx);
      double step = 2 * kPi / static_cast<double>(k);
      for (std::size_t t = 1; t < k; ++t) {
        int v = ring[(i + t) % k];
        if (is_placed(v)) continue;
        double th = ta + step * static_cast<double>(t);
        mark(v, cx + circum * std::cos(th), cy + circum * std::sin(th));
        newly_placed.push_back(v);
      }
      return;
    }

    // Free-standing ring (bootstrap): center at the origin.
    double th0 = kPi / 2;
    double step = 2 * kPi / static_cast<double>(k);
    for (std::size_t t = 0; t < k; ++t) {
      int v = ring[t];
      if (is_placed(v)) continue;
      double th = th0 + step * static_cast<double>(t);
      mark(v, circum * std::cos(th), circum * std::sin(th));
      newly_placed.push_back(v);
    }
  }

  // First ring whose cyclic order makes (u, v) an edge.
  int ring_of_bond(int u, int v) const {
    for (std::size_t r = 0; r < ri.rings.size(); ++r) {
      const std::vector<int>& ring = ri.rings[r];
      for (std::size_t i = 0; i < ring.size(); ++i) {
        int a = ring[i], b = ring[(i + 1) % ring.size()];
        if ((a == u && b == v) || (a == v && b == u)) {
          return static_cast<int>(r);
        }
      }
    }
    return -1;
  }

  void run() {
    std::queue<int> frontier;
    std::vector<int> fresh;
    if (ri.atom_in_ring[0]) {
      for (std::size_t r = 0; r < ri.rings.size(); ++r) {
        const std::vector<int>& ring = ri.rings[r];
        if (std::find(ring.begin(), ring.end(), 0) != ring.end()) {
          place_ring(r, fresh);
          break;
        }
      }
    } else {
      mark(0, 0.0, 0.0);
      fresh.push_back(0);
    }
    std::sort(fresh.begin(), fresh.end());
    for (int a : fresh) frontier.push(a);

    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      std::vector<std::pair<int, int>> nbrs = g.neighbors(u);
      std::sort(nbrs.begin(), nbrs.end());
      for (auto [v, bi] : nbrs) {
        if (is_placed(v)) continue;
        fresh.clear();
        if (ri.bond_in_ring[static_cast<std::size_t>(bi)]) {
          int r = ring_of_bond(u, v);
          if (r >= 0 && !ring_done[static_cast<std::size_t>(r)]) {
            place_ring(static_cast<std::size_t>(r), fresh);
          }
          if (!is_placed(v)) {  // bridged fallback
            place_chain_atom(u, v);
            fresh.push_back(v);
          }
        } else {
          place_chain_atom(u, v);
          fresh.push_back(v);
        }
        std::sort(fresh.begin(), fresh.end());
        for (int a : fresh) frontier.push(a);
      }
    }
  }

  // Relaxes acyclic atoms to undo collisions; ring geometry stays rigid.
  void repair() {
    int n = g.num_atoms();
    if (n < 2) return;
    std::vector<std::vector<bool>> bonded(
        static_cast<std::size_t>(n),
        std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int bi = 0; bi < g.num_bonds(); ++bi) {
      const auto& b = g.bond(bi);
      bonded[static_cast<std::size_t>(b.a)][static_cast<std::size_t>(b.b)] =
          true;
      bonded[static_cast<std::size_t>(b.b)][static_cast<std::size_t>(b.a)] =
          true;
    }
    std::vector<double> fx(static_cast<std::size_t>(n)),
        fy(static_cast<std::size_t>(n));
    for (int iter = 0; iter < 200; ++iter) {
      std::fill(fx.begin(), fx.end(), 0.0);
      std::fill(fy.begin(), fy.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (bonded[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
            continue;
          double dx = X(j) - X(i), dy = Y(j) - Y(i);
          double d = std::hypot(dx, dy);
          if (d >= 0.72) continue;
          double ux, uy;
          if (d < 1e-9) {
            double th = 2 * kPi * static_cast<double>(i + 1) /
                        static_cast<double>(n + 1);
            ux = std::cos(th);
            uy = std::sin(th);
          } else {
            ux = dx / d;
            uy = dy / d;
          }
          double f = 0.5 * (0.72 - d);
          fx[static_cast<std::size_t>(i)] -= f * ux;
          fy[static_cast<std::size_t>(i)] -= f * uy;
          fx[static_cast<std::size_t>(j)] += f * ux;
          fy[static_cast<std::size_t>(j)] += f * uy;
        }
      }
      for (int bi = 0; bi < g.num_bonds(); ++bi) {
        const auto& b = g.bond(bi);
        double dx = X(b.b) - X(b.a), dy = Y(b.b) - Y(b.a);
        double d = std::hypot(dx, dy);
        if (d < 1e-9) continue;
        double f = 0.3 * (d - 1.0);
        fx[static_cast<std::size_t>(b.a)] += f * dx / d;
        fy[static_cast<std::size_t>(b.a)] += f * dy / d;
        fx[static_cast<std::size_t>(b.b)] -= f * dx / d;
        fy[static_cast<std::size_t>(b.b)] -= f * dy / d;
      }
      double max_disp = 0;
      for (int i = 0; i < n; ++i) {
        if (ri.atom_in_ring[static_cast<std::size_t>(i)]) continue;
        double dx = std::clamp(fx[static_cast<std::size_t>(i)], -0.15, 0.15);
        double dy = std::clamp(fy[static_cast<std::size_t>(i)], -0.15, 0.15);
        X(i) += dx;
        Y(i) += dy;
        max_disp = std::max(max_disp, std::hypot(dx, dy));
      }
      if (max_disp < 1e-4) break;
    }
  }

  void finish() {
    int n = g.num_atoms();
    if (g.num_bonds() > 0) {
      double total = 0;
      for (int bi = 0; bi < g.num_bonds(); ++bi) {
        const auto& b = g.bond(bi);
        total += std::hypot(X(b.b) - X(b.a), Y(b.b) - Y(b.a));
      }
      double mean = total / static_cast<double>(g.num_bonds());
      if (mean > 1e-9) {
        for (int i = 0; i < n; ++i) {
          X(i) /= mean;
          Y(i) /= mean;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d = std::hypot(X(j) - X(i), Y(j) - Y(i));
        if (d < 0.25) {
          raise(Errc::kLayoutFailure, "atoms collide in 2d layout");
        }
      }
    }
  }
};

}  // namespace detail

inline Layout layout_2d(const chem::MoleculeGraph& g) {
  if (g.num_atoms() == 0) return {};
  if (!g.connected()) {
    raise(Errc::kLayoutFailure, "layout requires a connected graph");
  }
  detail::Placer p(g);
  p.run();
  p.repair();
  p.finish();
  return std::move(p.lay);
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_LAYOUT_HPP
