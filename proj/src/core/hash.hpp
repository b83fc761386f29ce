// core/hash.hpp

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

#ifndef VF_CORE_HASH_HPP_
#define VF_CORE_HASH_HPP_

#include <string>
#include <string_view>

#include "core/common.hpp"

namespace vf {

// 64-bit FNV-1a. Used for content hashes of artifacts and for seed
// derivation, not for anything adversarial.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n);
  void update(std::string_view s) { update(s.data(), s.size()); }
  u64 digest() const { return state_; }

 private:
  u64 state_ = 0xcbf29ce484222325ull;
};

u64 fnv1a(std::string_view s);
u64 fnv1a(const void* data, std::size_t n);

// Lower-case 16-hex-digit rendering, the canonical form stored in headers
// and manifests.
std::string hash_hex(u64 h);

// Content hash of a whole file.
std::string hash_file(const std::string& path);

// splitmix64 finalizer; good avalanche, used by seed derivation.
u64 splitmix64(u64 x);

}  // namespace vf

#endif  // VF_CORE_HASH_HPP_
