// core/wav_io.cpp

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

#include "core/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace vf {

void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  VF_CHECK(sample_rate > 0, "write_wav bad sample rate");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write wav: " + path);

  auto put16 = [&](u32 v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    f.write(b, 2);
  };
  auto put32 = [&](u32 v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    f.write(b, 4);
  };

  u32 data_size = static_cast<u32>(samples.size() * 2);
  f.write("RIFF", 4);
  put32(36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put32(16);
  put16(1);  // PCM
  put16(1);  // mono
  put32(static_cast<u32>(sample_rate));
  put32(static_cast<u32>(sample_rate * 2));
  put16(2);   // block align
  put16(16);  // bits per sample
  f.write("data", 4);
  put32(data_size);
  for (double s : samples) {
    double x = std::min(1.0, std::max(-1.0, s));
    auto pcm = static_cast<std::int16_t>(std::lround(x * 32767.0));
    put16(static_cast<u32>(static_cast<std::uint16_t>(pcm)));
  }
  if (!f) throw IoError("wav write failed: " + path);
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const u8* p = reinterpret_cast<const u8*>(bytes.data());
  std::size_t n = bytes.size();
  VF_CHECK_INPUT(n >= 44 && std::memcmp(p, "RIFF", 4) == 0 && std::memcmp(p + 8, "WAVE", 4) == 0,
                 "not a wav: " + path);

  auto rd16 = [&](std::size_t off) {
    return static_cast<u32>(p[off]) | (static_cast<u32>(p[off + 1]) << 8);
  };
  auto rd32 = [&](std::size_t off) {
    return static_cast<u32>(p[off]) | (static_cast<u32>(p[off + 1]) << 8) |
           (static_cast<u32>(p[off + 2]) << 16) | (static_cast<u32>(p[off + 3]) << 24);
  };

  WavData out;
  std::size_t pos = 12;
  std::size_t data_off = 0, data_len = 0;
  while (pos + 8 <= n) {
    u32 len = rd32(pos + 4);
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      VF_CHECK_INPUT(rd16(pos + 8) == 1 && rd16(pos + 10) == 1 && rd16(pos + 22) == 16,
                     "wav must be 16-bit PCM mono: " + path);
      out.sample_rate = static_cast<int>(rd32(pos + 12));
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  VF_CHECK_INPUT(out.sample_rate > 0 && data_off > 0 && data_off + data_len <= n,
                 "wav missing fmt/data: " + path);

  out.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    auto v = static_cast<std::int16_t>(rd16(data_off + 2 * i));
    out.samples[i] = static_cast<double>(v) / 32767.0;
  }
  return out;
}

}  // namespace vf
