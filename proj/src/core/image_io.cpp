// core/image_io.cpp

// Copyright 2026 The voiceface Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

namespace vf {

namespace {

void put_u32(std::string& s, u32 v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

u32 get_u32(const u8* p) {
  return (static_cast<u32>(p[0]) << 24) | (static_cast<u32>(p[1]) << 16) |
         (static_cast<u32>(p[2]) << 8) | static_cast<u32>(p[3]);
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
  put_u32(out, static_cast<u32>(payload.size()));
  std::string body(type, 4);
  body += payload;
  out += body;
  u32 crc = static_cast<u32>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  put_u32(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::string& path, const Tensor& pixels) {
  VF_CHECK(pixels.rank() == 3 && pixels.dim(2) == 3, "write_png expects [H,W,3]");
  i64 h = pixels.dim(0), w = pixels.dim(1);
  VF_CHECK(h > 0 && w > 0, "write_png empty image");

  // Filter type 0 on every scanline; the compression level is pinned so
  // artifact bytes are reproducible.
  std::vector<u8> raw(static_cast<std::size_t>(h * (1 + 3 * w)));
  std::size_t k = 0;
  for (i64 i = 0; i < h; ++i) {
    raw[k++] = 0;
    for (i64 j = 0; j < w; ++j)
      for (i64 c = 0; c < 3; ++c) {
        double x = pixels.at(i, j, c);
        x = std::min(1.0, std::max(0.0, x));
        raw[k++] = static_cast<u8>(std::lround(x * 255.0));
      }
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<u8> comp(bound);
  if (compress2(comp.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("png deflate failed");
  comp.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<u32>(w));
  put_u32(ihdr, static_cast<u32>(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", std::string(reinterpret_cast<char*>(comp.data()), comp.size()));
  append_chunk(out, "IEND", "");

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write png: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("png write failed: " + path);
}

Tensor read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open png: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const u8* p = reinterpret_cast<const u8*>(bytes.data());
  std::size_t n = bytes.size();
  VF_CHECK_INPUT(n > 8 && std::memcmp(p, "\x89PNG\r\n\x1a\n", 8) == 0, "not a png: " + path);

  i64 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  std::string idat;
  std::size_t pos = 8;
  while (pos + 12 <= n) {
    u32 len = get_u32(p + pos);
    std::string type(reinterpret_cast<const char*>(p + pos + 4), 4);
    VF_CHECK_INPUT(pos + 12 + len <= n, "truncated png chunk: " + path);
    const u8* payload = p + pos + 8;
    if (type == "IHDR") {
      VF_CHECK_INPUT(len == 13, "bad IHDR");
      w = get_u32(payload);
      h = get_u32(payload + 4);
      bit_depth = payload[8];
      color_type = payload[9];
      VF_CHECK_INPUT(payload[12] == 0, "interlaced png unsupported");
    } else if (type == "IDAT") {
      idat.append(reinterpret_cast<const char*>(payload), len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  VF_CHECK_INPUT(w > 0 && h > 0, "png missing IHDR: " + path);
  VF_CHECK_INPUT(bit_depth == 8 && color_type == 2, "png must be 8-bit RGB: " + path);

  uLongf raw_len = static_cast<uLongf>(h * (1 + 3 * w));
  std::vector<u8> raw(raw_len);
  int rc = uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()),
                      static_cast<uLong>(idat.size()));
  VF_CHECK_INPUT(rc == Z_OK && raw_len == static_cast<uLongf>(h * (1 + 3 * w)),
                 "png inflate failed: " + path);

  // Undo per-scanline filters.
  i64 stride = 3 * w;
  std::vector<u8> img(static_cast<std::size_t>(h * stride));
  for (i64 i = 0; i < h; ++i) {
    u8 filter = raw[static_cast<std::size_t>(i * (stride + 1))];
    const u8* src = raw.data() + i * (stride + 1) + 1;
    u8* dst = img.data() + i * stride;
    const u8* up = i > 0 ? img.data() + (i - 1) * stride : nullptr;
    for (i64 j = 0; j < stride; ++j) {
      int a = j >= 3 ? dst[j - 3] : 0;
      int b = up ? up[j] : 0;
      int c = (up && j >= 3) ? up[j - 3] : 0;
      int x = src[j];
      switch (filter) {
        case 0: dst[j] = static_cast<u8>(x); break;
        case 1: dst[j] = static_cast<u8>((x + a) & 0xff); break;
        case 2: dst[j] = static_cast<u8>((x + b) & 0xff); break;
        case 3: dst[j] = static_cast<u8>((x + (a + b) / 2) & 0xff); break;
        case 4: dst[j] = static_cast<u8>((x + paeth(a, b, c)) & 0xff); break;
        default: throw InputError("png bad filter type");
      }
    }
  }

  Tensor out({h, w, 3});
  for (i64 i = 0; i < h; ++i)
    for (i64 j = 0; j < w; ++j)
      for (i64 c = 0; c < 3; ++c)
        out.at(i, j, c) = static_cast<double>(img[static_cast<std::size_t>(i * stride + 3 * j + c)]) / 255.0;
  return out;
}

}  // namespace vf
