// core/archive.hpp

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

#ifndef VF_CORE_ARCHIVE_HPP_
#define VF_CORE_ARCHIVE_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/tensor.hpp"

namespace vf {

// Single-file parameter archive: a JSON header (kind + free-form meta +
// array directory) followed by raw little-endian float64 payloads in
// directory order. Checkpoints, priors, and probe models all use it.
struct Archive {
  std::string kind;
  nlohmann::ordered_json meta;
  std::vector<std::pair<std::string, Tensor>> arrays;

  void add(const std::string& name, const Tensor& t) { arrays.push_back({name, t}); }
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  void save(const std::string& path) const;
  static Archive load(const std::string& path);
};

}  // namespace vf

#endif  // VF_CORE_ARCHIVE_HPP_
