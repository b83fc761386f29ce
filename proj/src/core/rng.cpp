// core/rng.cpp

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

#include "core/rng.hpp"

#include <cmath>
#include <numbers>

#include "core/hash.hpp"

namespace vf {

i64 RandomStream::uniform_int(i64 n) {
  VF_CHECK(n > 0, "uniform_int requires n > 0");
  u64 un = static_cast<u64>(n);
  u64 limit = ~u64{0} - (~u64{0} % un);
  u64 x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<i64>(x % un);
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<double> RandomStream::normal_vec(i64 n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = normal();
  return out;
}

std::vector<i64> RandomStream::permutation(i64 n) {
  std::vector<i64> p(static_cast<std::size_t>(n));
  for (i64 i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (i64 i = n - 1; i > 0; --i) {
    i64 j = uniform_int(i + 1);
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

u64 seed_split(u64 global_seed, std::string_view label, u64 index) {
  u64 h = fnv1a(label);
  h = splitmix64(h ^ splitmix64(global_seed));
  h = splitmix64(h ^ splitmix64(index ^ 0xa5a5a5a5a5a5a5a5ull));
  return h;
}

}  // namespace vf
