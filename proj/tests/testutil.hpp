// tests/testutil.hpp

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

#ifndef VF_TESTS_TESTUTIL_HPP_
#define VF_TESTS_TESTUTIL_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"

namespace vftest {

// Central finite-difference gradient check. Rebuilds the graph through
// `loss_fn` for every probe, perturbing the parameter leaves in place.
// Returns the worst relative error over sampled coordinates.
inline double grad_check(const std::function<vf::Var()>& loss_fn, std::vector<vf::Var> params,
                         vf::RandomStream& rng, int max_coords_per_tensor = 24,
                         double h = 1e-5) {
  using vf::i64;

  for (auto& p : params) p.zero_grad();
  vf::Var loss = loss_fn();
  vf::backward(loss);
  std::vector<vf::Tensor> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    vf::Tensor& value = params[pi].mutable_value();
    i64 n = value.numel();
    int probes = static_cast<int>(std::min<i64>(n, max_coords_per_tensor));
    for (int k = 0; k < probes; ++k) {
      i64 idx = probes == static_cast<int>(n) ? k : rng.uniform_int(n);
      double saved = value[idx];
      value[idx] = saved + h;
      double lp = loss_fn().val()[0];
      value[idx] = saved - h;
      double lm = loss_fn().val()[0];
      value[idx] = saved;
      double numeric = (lp - lm) / (2.0 * h);
      double ana = analytic[pi][idx];
      double denom = std::max({std::abs(numeric), std::abs(ana), 1e-6});
      double rel = std::abs(numeric - ana) / denom;
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

inline vf::Var randn_var(std::vector<vf::i64> shape, vf::RandomStream& rng,
                         bool requires_grad = true) {
  return vf::Var::leaf(vf::Tensor::randn(std::move(shape), rng), requires_grad);
}

}  // namespace vftest

#endif  // VF_TESTS_TESTUTIL_HPP_
