// core/rng.hpp

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

#ifndef VF_CORE_RNG_HPP_
#define VF_CORE_RNG_HPP_

#include <random>
#include <string_view>
#include <vector>

#include "core/common.hpp"

namespace vf {

// Deterministic random stream. mt19937_64 gives a bit-stable sequence
// across platforms; uniform/normal transforms are written out explicitly
// because the std distributions are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(u64 seed) : engine_(seed) {}

  u64 next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform in [0, n). Rejection-free modulo would bias; use
  // rejection sampling on the top range.
  i64 uniform_int(i64 n);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  std::vector<double> normal_vec(i64 n);

  // Fisher-Yates shuffle of [0, n).
  std::vector<i64> permutation(i64 n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Collision-resistant derivation of per-module seeds from a global seed:
// hash of label || index || seed, mixed through splitmix64. Stable across
// versions within a manifest schema version.
u64 seed_split(u64 global_seed, std::string_view label, u64 index);

}  // namespace vf

#endif  // VF_CORE_RNG_HPP_
