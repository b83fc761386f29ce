// core/archive.cpp

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

#include "core/archive.hpp"

#include <cstring>
#include <fstream>

namespace vf {

namespace {
constexpr char kMagic[8] = {'V', 'F', 'A', 'R', 'C', 'H', '1', '\n'};
}

bool Archive::has(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return true;
  return false;
}

const Tensor& Archive::get(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return t;
  throw InputError("archive array not found: " + name);
}

void Archive::save(const std::string& path) const {
  nlohmann::ordered_json header;
  header["kind"] = kind;
  header["meta"] = meta;
  auto dir = nlohmann::ordered_json::array();
  for (const auto& [name, t] : arrays) {
    nlohmann::ordered_json e;
    e["name"] = name;
    e["shape"] = t.shape();
    dir.push_back(e);
  }
  header["arrays"] = dir;
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write archive: " + path);
  out.write(kMagic, 8);
  u64 hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& [name, t] : arrays)
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * 8));
  out.flush();
  if (!out) throw IoError("archive write failed: " + path);
}

Archive Archive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw InputError("not a parameter archive: " + path);
  u64 hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  if (!in || hlen > (1ull << 30)) throw InputError("corrupt archive header: " + path);
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw InputError("truncated archive header: " + path);
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(hs);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad archive header json: ") + e.what());
  }

  Archive a;
  a.kind = header.at("kind").get<std::string>();
  a.meta = header.at("meta");
  for (const auto& e : header.at("arrays")) {
    std::string name = e.at("name").get<std::string>();
    std::vector<i64> shape = e.at("shape").get<std::vector<i64>>();
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * 8));
    if (!in) throw InputError("truncated archive payload: " + path);
    a.arrays.push_back({std::move(name), std::move(t)});
  }
  return a;
}

}  // namespace vf
