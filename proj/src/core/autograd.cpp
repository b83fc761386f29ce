// core/autograd.cpp

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

#include "core/autograd.hpp"

#include <unordered_set>

namespace vf {

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(AgNode&)> backward_fn) {
  Var out = Var::leaf(std::move(value), false);
  AgNode& n = *out.node();
  n.parents.reserve(parents.size());
  for (const Var& p : parents) {
    VF_CHECK(p.defined(), "op parent is undefined");
    n.requires_grad = n.requires_grad || p.node()->requires_grad;
    n.parents.push_back(p.node());
  }
  if (n.requires_grad) n.backward_fn = std::move(backward_fn);
  return out;
}

void backward(const Var& loss) {
  VF_CHECK(loss.defined(), "backward on undefined Var");
  VF_CHECK(loss.val().numel() == 1, "backward requires a scalar loss");
  VF_CHECK_NUMERIC(std::isfinite(loss.val()[0]), "loss is not finite");

  // Iterative post-order topological sort.
  std::vector<AgNode*> order;
  std::unordered_set<AgNode*> visited;
  struct Frame {
    AgNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  AgNode* root = loss.node().get();
  if (!root->requires_grad) return;
  stack.push_back({root, 0});
  visited.insert(root);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      AgNode* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    AgNode* n = *it;
    if (n->backward_fn && n->grad.defined()) n->backward_fn(*n);
  }
}

}  // namespace vf
