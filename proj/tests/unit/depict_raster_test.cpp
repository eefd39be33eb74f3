//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "cliffmask/depict/png_io.hpp"
#include "cliffmask/depict/raster.hpp"

#include "support/catch.hpp"

#include "cliffmask/core/rng.hpp"

using namespace cliffmask;
using namespace cliffmask::depict;
using Catch::Approx;
using cliffmask::testing::expect_error;

TEST_CASE("disc painting matches the analytic area") {
  RasterImage img(100, 100, kWhite);
  Bitmap rec(100, 100);
  paint_disc(img, 50, 50, 20, kGreen, &rec);
  double area = 3.14159265358979 * 20 * 20;
  CHECK(std::abs(static_cast<double>(rec.count()) - area) < 0.02 * area);
  CHECK(img.get(50, 50) == kGreen);
  CHECK(img.get(5, 5) == kWhite);
}

TEST_CASE("capsule painting matches the analytic area") {
  RasterImage img(100, 100, kWhite);
  Bitmap rec(100, 100);
  paint_capsule(img, 30, 50, 60, 50, 5, kBlack, &rec);
  // rectangle 2*hw*len plus the two half-disc caps; the <= boundary adds
  // roughly one extra row and column of pixels, hence the one-sided band
  double area = 2.0 * 5 * 30 + 3.14159265358979 * 25;
  double painted = static_cast<double>(rec.count());
  CHECK(painted >= area);
  CHECK(painted <= 1.15 * area);
}

TEST_CASE("dilation grows by a euclidean disc") {
  Bitmap b(20, 20);
  b.set(10, 10);
  // offsets with dx^2+dy^2 <= 4: center, four at distance 1, four diagonals,
  // four at distance 2 -> 13 pixels
  CHECK(b.dilated(2).count() == 13);

  Bitmap corner(20, 20);
  corner.set(0, 0);
  CHECK(corner.dilated(2).count() == 6);  // clipped to the first quadrant

  CHECK(b.dilated(0).count() == 1);
}

TEST_CASE("iou hand values") {
  Bitmap a(10, 1), b(10, 1);
  for (int x = 0; x < 6; ++x) a.set(x, 0);
  for (int x = 2; x < 8; ++x) b.set(x, 0);
  // |a & b| = 4, |a | b| = 8
  CHECK(iou(a, b) == Approx(0.5));
  CHECK(iou(a, a) == 1.0);
  Bitmap empty(10, 1);
  CHECK(iou(empty, empty) == 1.0);
  CHECK(iou(a, empty) == 0.0);
}

TEST_CASE("glyphs put ink on the canvas") {
  RasterImage img(64, 64, kWhite);
  draw_text_centered(img, "Cl", 32, 32, 2, kBlack);
  int black = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (img.get(x, y) == kBlack) ++black;
    }
  }
  CHECK(black > 30);
  // centered: no ink near the borders
  for (int x = 0; x < 64; ++x) {
    CHECK(img.get(x, 0) == kWhite);
    CHECK(img.get(x, 63) == kWhite);
  }
}

TEST_CASE("png encode/decode round trip") {
  Rng rng(7);
  int w = 37, h = 23;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : rgb) v = static_cast<std::uint8_t>(rng.next_u64() & 0xFF);

  auto bytes = png_encode(rgb.data(), w, h);
  auto again = png_encode(rgb.data(), w, h);
  CHECK(bytes == again);  // byte-stable encoding

  DecodedPng dec = png_decode(bytes);
  CHECK(dec.width == w);
  CHECK(dec.height == h);
  CHECK(dec.rgb == rgb);
}

TEST_CASE("png decode rejects non-png input") {
  std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  expect_error([&] { png_decode(junk); }, Errc::kIoError);
}

TEST_CASE("png file io") {
  RasterImage img(16, 16, kWhite);
  paint_disc(img, 8, 8, 5, kGreen);
  std::string path = "/tmp/cliffmask_png_io_test.png";
  png_write_file(path, img.rgb.data(), img.width, img.height);
  DecodedPng dec = png_read_file(path);
  CHECK(dec.width == 16);
  CHECK(dec.rgb == img.rgb);
  std::remove(path.c_str());
}
