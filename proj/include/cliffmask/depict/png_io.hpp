//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_PNG_IO_HPP
#define CLIFFMASK_DEPICT_PNG_IO_HPP

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cliffmask/core/error.hpp"

namespace cliffmask::depict {

// Minimal PNG support: 8-bit RGB, non-interlaced. Encoding always uses
// filter 0 and a fixed zlib level so identical pixels give identical bytes.
namespace png_detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, out.data() + crc_start, static_cast<uInt>(4 + data.size())));
  put_u32(out, crc);
}

}  // namespace png_detail

inline std::vector<std::uint8_t> png_encode(const std::uint8_t* rgb,
                                            int width, int height) {
  using namespace png_detail;
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) *
              (static_cast<std::size_t>(width) * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    const std::uint8_t* row =
        rgb + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) * 3;
    raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    raise(Errc::kIoError, "zlib compression failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                   '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});
  return out;
}

inline void png_write_file(const std::string& path, const std::uint8_t* rgb,
                           int width, int height) {
  auto bytes = png_encode(rgb, width, height);
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(Errc::kIoError, "cannot write PNG: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

struct DecodedPng {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

inline DecodedPng png_decode(const std::vector<std::uint8_t>& bytes) {
  using namespace png_detail;
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G',
                                      '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
    raise(Errc::kIoError, "not a PNG stream");
  }
  DecodedPng img;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool saw_ihdr = false;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t len = get_u32(bytes.data() + pos);
    if (pos + 12 + len > bytes.size()) {
      raise(Errc::kIoError, "truncated PNG chunk");
    }
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const std::uint8_t* data = bytes.data() + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) raise(Errc::kIoError, "bad IHDR");
      img.width = static_cast<int>(get_u32(data));
      img.height = static_cast<int>(get_u32(data + 4));
      if (data[8] != 8 || data[9] != 2 || data[12] != 0) {
        raise(Errc::kIoError, "unsupported PNG format (need 8-bit RGB)");
      }
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || img.width <= 0 || img.height <= 0) {
    raise(Errc::kIoError, "PNG missing IHDR");
  }
  std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  std::vector<std::uint8_t> raw(
      (stride + 1) * static_cast<std::size_t>(img.height));
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size()) {
    raise(Errc::kIoError, "PNG inflate failed");
  }

  img.rgb.assign(stride * static_cast<std::size_t>(img.height), 0);
  auto paeth = [](int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
  };
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) *
                                               (stride + 1);
    std::uint8_t filter = src[0];
    ++src;
    std::uint8_t* dst = img.rgb.data() + static_cast<std::size_t>(y) * stride;
    const std::uint8_t* up =
        y > 0 ? img.rgb.data() + static_cast<std::size_t>(y - 1) * stride
              : nullptr;
    for (std::size_t x = 0; x < stride; ++x) {
      int a = x >= 3 ? dst[x - 3] : 0;
      int b = up ? up[x] : 0;
      int c = (up && x >= 3) ? up[x - 3] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: raise(Errc::kIoError, "unknown PNG filter");
      }
      dst[x] = static_cast<std::uint8_t>(v & 0xff);
    }
  }
  return img;
}

inline DecodedPng png_read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::kIoError, "cannot open PNG: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return png_decode(bytes);
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_PNG_IO_HPP
