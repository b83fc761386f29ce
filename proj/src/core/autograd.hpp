// core/autograd.hpp

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

#ifndef VF_CORE_AUTOGRAD_HPP_
#define VF_CORE_AUTOGRAD_HPP_

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

namespace vf {

// Define-by-run reverse-mode autodiff. Each op builds a node whose
// backward closure accumulates into the parents' grad tensors. The graph
// is freed when the last Var referencing it goes out of scope; parameters
// are leaves and never hold references to children.
struct AgNode {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<AgNode>> parents;
  std::function<void(AgNode&)> backward_fn;

  Tensor& ensure_grad() {
    if (!grad.defined()) grad = Tensor::zeros(value.shape());
    return grad;
  }
};

class Var {
 public:
  Var() = default;

  static Var leaf(Tensor value, bool requires_grad = false) {
    Var v;
    v.node_ = std::make_shared<AgNode>();
    v.node_->value = std::move(value);
    v.node_->requires_grad = requires_grad;
    return v;
  }
  static Var constant(Tensor value) { return leaf(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Tensor& val() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  Tensor& grad() { return node_->ensure_grad(); }
  const Tensor& grad_or_zero() const { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.defined(); }
  void zero_grad() {
    if (node_->grad.defined()) std::fill(node_->grad.vec().begin(), node_->grad.vec().end(), 0.0);
  }
  bool requires_grad() const { return node_->requires_grad; }
  const std::shared_ptr<AgNode>& node() const { return node_; }

 private:
  std::shared_ptr<AgNode> node_;
};

// Builds an op node. requires_grad is inherited from the parents.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(AgNode&)> backward_fn);

// Reverse pass from a scalar loss ([1]-shaped). Seeds d(loss)/d(loss)=1.
void backward(const Var& loss);

}  // namespace vf

#endif  // VF_CORE_AUTOGRAD_HPP_
