// nn/layers.hpp

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

#ifndef VF_NN_LAYERS_HPP_
#define VF_NN_LAYERS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"

namespace vf::nn {

// Named parameter list; the unit of checkpointing and optimization.
struct ParamList {
  std::vector<std::pair<std::string, Var>> items;

  void add(const std::string& name, const Var& v) { items.push_back({name, v}); }
  void merge(const std::string& prefix, const ParamList& other) {
    for (const auto& [name, v] : other.items) items.push_back({prefix + "." + name, v});
  }
  std::vector<Var> vars() const {
    std::vector<Var> out;
    out.reserve(items.size());
    for (const auto& [name, v] : items) out.push_back(v);
    return out;
  }
  i64 count() const {
    i64 n = 0;
    for (const auto& [name, v] : items) n += v.val().numel();
    return n;
  }
  void zero_grads() const {
    for (const auto& [name, v] : items) {
      Var vv = v;
      vv.zero_grad();
    }
  }
};

// He-uniform fan-in initialization, the default for conv/linear weights.
Tensor he_init(std::vector<i64> shape, i64 fan_in, RandomStream& rng);

struct Conv2dLayer {
  Var w, b;
  int stride = 1;
  int pad = 1;

  static Conv2dLayer create(i64 in_ch, i64 out_ch, i64 ksize, int stride, int pad,
                            RandomStream& rng, bool zero_init = false);
  Var forward(Var x) const { return conv2d(x, w, b, stride, pad); }
  void collect(const std::string& prefix, ParamList& out) const {
    out.add(prefix + ".w", w);
    out.add(prefix + ".b", b);
  }
};

struct LinearLayer {
  Var w, b;

  static LinearLayer create(i64 in_dim, i64 out_dim, RandomStream& rng, bool zero_init = false);
  Var forward(Var x) const { return linear(x, w, b); }
  void collect(const std::string& prefix, ParamList& out) const {
    out.add(prefix + ".w", w);
    out.add(prefix + ".b", b);
  }
};

struct LayerNormLayer {
  Var gamma, beta;

  static LayerNormLayer create(i64 dim);
  Var forward(Var x) const { return layernorm_last(x, gamma, beta); }
  void collect(const std::string& prefix, ParamList& out) const {
    out.add(prefix + ".gamma", gamma);
    out.add(prefix + ".beta", beta);
  }
};

// Adam with per-group learning rates. Groups keep insertion order so the
// update is deterministic.
class Adam {
 public:
  struct Group {
    std::vector<Var> params;
    double lr;
  };

  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void add_group(std::vector<Var> params, double lr);
  void zero_grad();
  void step();
  i64 step_count() const { return t_; }

 private:
  struct Slot {
    Var param;
    Tensor m, v;
    double lr;
  };
  std::vector<Slot> slots_;
  double beta1_, beta2_, eps_;
  i64 t_ = 0;
};

}  // namespace vf::nn

#endif  // VF_NN_LAYERS_HPP_
