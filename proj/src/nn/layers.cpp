// nn/layers.cpp

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

#include "nn/layers.hpp"

#include <cmath>

namespace vf::nn {

Tensor he_init(std::vector<i64> shape, i64 fan_in, RandomStream& rng) {
  VF_CHECK(fan_in > 0, "he_init fan_in must be positive");
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

Conv2dLayer Conv2dLayer::create(i64 in_ch, i64 out_ch, i64 ksize, int stride, int pad,
                                RandomStream& rng, bool zero_init) {
  Conv2dLayer layer;
  layer.stride = stride;
  layer.pad = pad;
  Tensor w = zero_init ? Tensor::zeros({out_ch, in_ch, ksize, ksize})
                       : he_init({out_ch, in_ch, ksize, ksize}, in_ch * ksize * ksize, rng);
  layer.w = Var::leaf(std::move(w), true);
  layer.b = Var::leaf(Tensor::zeros({out_ch}), true);
  return layer;
}

LinearLayer LinearLayer::create(i64 in_dim, i64 out_dim, RandomStream& rng, bool zero_init) {
  LinearLayer layer;
  Tensor w = zero_init ? Tensor::zeros({in_dim, out_dim}) : he_init({in_dim, out_dim}, in_dim, rng);
  layer.w = Var::leaf(std::move(w), true);
  layer.b = Var::leaf(Tensor::zeros({out_dim}), true);
  return layer;
}

LayerNormLayer LayerNormLayer::create(i64 dim) {
  LayerNormLayer layer;
  layer.gamma = Var::leaf(Tensor::full({dim}, 1.0), true);
  layer.beta = Var::leaf(Tensor::zeros({dim}), true);
  return layer;
}

void Adam::add_group(std::vector<Var> params, double lr) {
  VF_CHECK(lr >= 0.0, "negative learning rate");
  for (Var& p : params) {
    Slot s;
    s.param = p;
    s.m = Tensor::zeros(p.val().shape());
    s.v = Tensor::zeros(p.val().shape());
    s.lr = lr;
    slots_.push_back(std::move(s));
  }
}

void Adam::zero_grad() {
  for (Slot& s : slots_) s.param.zero_grad();
}

void Adam::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Slot& s : slots_) {
    if (!s.param.has_grad()) continue;
    Tensor& g = s.param.grad();
    VF_CHECK_NUMERIC(g.all_finite(), "non-finite gradient in Adam step");
    Tensor& value = s.param.mutable_value();
    for (i64 i = 0; i < value.numel(); ++i) {
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
      double mhat = s.m[i] / bc1;
      double vhat = s.v[i] / bc2;
      value[i] -= s.lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace vf::nn
