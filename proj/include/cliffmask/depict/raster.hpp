//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_RASTER_HPP
#define CLIFFMASK_DEPICT_RASTER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cliffmask/core/error.hpp"

namespace cliffmask::depict {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Color& o) const {
    return r == o.r && g == o.g && b == o.b;
  }
};

inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kGreen{0, 255, 0};  // highlight hue, H=120 deg
// Linework seen through a highlight: same hue, V=0.59, still inside the
// detection gate.
inline constexpr Color kGreenShade{0, 150, 0};

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  RasterImage() = default;
  RasterImage(int w, int h, Color fill = kWhite) : width(w), height(h) {
    rgb.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3,
               0);
    clear(fill);
  }

  void clear(Color c) {
    for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
      rgb[i] = c.r;
      rgb[i + 1] = c.g;
      rgb[i + 2] = c.b;
    }
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  void set(int x, int y, Color c) {
    if (!in_bounds(x, y)) return;
    std::size_t i =
        (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x)) *
        3;
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }

  Color get(int x, int y) const {
    std::size_t i =
        (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x)) *
        3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }

  bool operator==(const RasterImage& o) const {
    return width == o.width && height == o.height && rgb == o.rgb;
  }
};

// Binary pixel set sharing the parent image geometry.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Bitmap() = default;
  Bitmap(int w, int h) : width(w), height(h) {
    bits.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  }

  void set(int x, int y) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x)] = 1;
  }

  bool get(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)] != 0;
  }

  long long count() const {
    long long n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
  }

  bool operator==(const Bitmap& o) const {
    return width == o.width && height == o.height && bits == o.bits;
  }

  // Euclidean dilation: every pixel within `radius` of a set pixel.
  Bitmap dilated(int radius) const {
    if (radius <= 0) return *this;
    std::vector<std::pair<int, int>> offs;
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        if (dx * dx + dy * dy <= radius * radius) offs.push_back({dx, dy});
      }
    }
    Bitmap out(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (!get(x, y)) continue;
        for (auto [dx, dy] : offs) out.set(x + dx, y + dy);
      }
    }
    return out;
  }
};

inline long long intersection_count(const Bitmap& a, const Bitmap& b) {
  long long n = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) n += (a.bits[i] & b.bits[i]);
  return n;
}

inline double iou(const Bitmap& a, const Bitmap& b) {
  long long inter = intersection_count(a, b);
  long long uni = a.count() + b.count() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---- painters ----------------------------------------------------------
// All painters write opaquely (later strokes cover earlier paint). When a
// record bitmap is supplied the painted pixels are added to it, which is
// how the renderer captures highlight ground truth.

inline bool is_dark(Color c) {
  return static_cast<int>(c.r) + static_cast<int>(c.g) +
             static_cast<int>(c.b) <
         384;
}

// When `over_dark` is given the brush acts like a translucent layer: pixels
// already carrying dark linework get that shade instead of `c`.
inline void paint_disc(RasterImage& img, double cx, double cy, double r,
                       Color c, Bitmap* record = nullptr,
                       const Color* over_dark = nullptr) {
  int x0 = std::max(0, static_cast<int>(std::floor(cx - r - 1)));
  int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + r + 1)));
  int y0 = std::max(0, static_cast<int>(std::floor(cy - r - 1)));
  int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + r + 1)));
  double rr = r * r;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= rr) {
        img.set(x, y,
                over_dark && is_dark(img.get(x, y)) ? *over_dark : c);
        if (record) record->set(x, y);
      }
    }
  }
}

// Segment with rounded caps; the 2-px bond stroke is a halfwidth-1 capsule.
inline void paint_capsule(RasterImage& img, double x0, double y0, double x1,
                          double y1, double halfwidth, Color c,
                          Bitmap* record = nullptr,
                          const Color* over_dark = nullptr) {
  double minx = std::min(x0, x1) - halfwidth - 1;
  double maxx = std::max(x0, x1) + halfwidth + 1;
  double miny = std::min(y0, y1) - halfwidth - 1;
  double maxy = std::max(y0, y1) + halfwidth + 1;
  int px0 = std::max(0, static_cast<int>(std::floor(minx)));
  int px1 = std::min(img.width - 1, static_cast<int>(std::ceil(maxx)));
  int py0 = std::max(0, static_cast<int>(std::floor(miny)));
  int py1 = std::min(img.height - 1, static_cast<int>(std::ceil(maxy)));
  double vx = x1 - x0, vy = y1 - y0;
  double len2 = vx * vx + vy * vy;
  double hw2 = halfwidth * halfwidth;
  for (int y = py0; y <= py1; ++y) {
    for (int x = px0; x <= px1; ++x) {
      double wx = x - x0, wy = y - y0;
      double t = len2 > 0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0)
                          : 0.0;
      double dx = wx - t * vx, dy = wy - t * vy;
      if (dx * dx + dy * dy <= hw2) {
        img.set(x, y,
                over_dark && is_dark(img.get(x, y)) ? *over_dark : c);
        if (record) record->set(x, y);
      }
    }
  }
}

inline void draw_circle_outline(RasterImage& img, double cx, double cy,
                                double r, double stroke, Color c) {
  int x0 = std::max(0, static_cast<int>(std::floor(cx - r - stroke)));
  int x1 = std::min(img.width - 1,
                    static_cast<int>(std::ceil(cx + r + stroke)));
  int y0 = std::max(0, static_cast<int>(std::floor(cy - r - stroke)));
  int y1 = std::min(img.height - 1,
                    static_cast<int>(std::ceil(cy + r + stroke)));
  double half = stroke / 2.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double d = std::hypot(x - cx, y - cy);
      if (std::abs(d - r) <= half) img.set(x, y, c);
    }
  }
}

// ---- embedded 5x7 bitmap font ------------------------------------------

inline const std::array<std::uint8_t, 7>* glyph_rows(char ch) {
  struct Entry {
    char ch;
    std::array<std::uint8_t, 7> rows;
  };
  static const Entry kFont[] = {
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
      {'b', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E}},
      {'c', {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E}},
      {'d', {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F}},
      {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
      {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
      {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
      {'h', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x11}},
      {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
      {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C}},
      {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
      {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15}},
      {'n', {0x00, 0x00, 0x1E, 0x11, 0x11, 0x11, 0x11}},
      {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
      {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
      {'q', {0x00, 0x00, 0x0F, 0x11, 0x0F, 0x01, 0x01}},
      {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
      {'s', {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
      {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
      {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
      {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'w', {0x00, 0x00, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
      {'y', {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
      {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
  };
  for (const Entry& e : kFont) {
    if (e.ch == ch) return &e.rows;
  }
  return nullptr;
}

inline void draw_glyph(RasterImage& img, char ch, int left, int top, int scale,
                       Color c) {
  const auto* rows = glyph_rows(ch);
  if (!rows) rows = glyph_rows('X');
  for (int ry = 0; ry < 7; ++ry) {
    for (int rx = 0; rx < 5; ++rx) {
      if (((*rows)[static_cast<std::size_t>(ry)] >> (4 - rx)) & 1) {
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            img.set(left + rx * scale + sx, top + ry * scale + sy, c);
          }
        }
      }
    }
  }
}

// Centers a short string (element symbol) on (cx, cy).
inline void draw_text_centered(RasterImage& img, const std::string& text,
                               double cx, double cy, int scale, Color c) {
  int n = static_cast<int>(text.size());
  if (n == 0) return;
  int w = n * 5 * scale + (n - 1) * scale;
  int h = 7 * scale;
  int left = static_cast<int>(std::lround(cx - w / 2.0));
  int top = static_cast<int>(std::lround(cy - h / 2.0));
  for (int k = 0; k < n; ++k) {
    draw_glyph(img, text[static_cast<std::size_t>(k)],
               left + k * 6 * scale, top, scale, c);
  }
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_RASTER_HPP
