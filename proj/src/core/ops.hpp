// core/ops.hpp

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

#ifndef VF_CORE_OPS_HPP_
#define VF_CORE_OPS_HPP_

#include <vector>

#include "core/autograd.hpp"

namespace vf {

// Elementwise.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_const(Var a, double c);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh_op(Var a);
Var exp_op(Var a);
Var log_op(Var a);
Var abs_op(Var a);
Var square(Var a);
Var clamp_op(Var a, double lo, double hi);
Var reciprocal(Var a);
Var mul_scalar_var(Var a, Var s);  // s is [1]

// Shape moves (no arithmetic).
Var reshape(Var a, std::vector<i64> shape);
Var transpose2(Var a);               // [M,N] -> [N,M]
Var transpose_last2(Var a);          // [B,M,N] -> [B,N,M]
Var to_tokens(Var x);                // [B,C,H,W] -> [B,H*W,C]
Var from_tokens(Var x, i64 h, i64 w);  // [B,N,C] -> [B,C,h,w]
Var split_heads(Var x, i64 heads);   // [B,N,h*e] -> [B*h,N,e]
Var merge_heads(Var x, i64 heads);   // [B*h,N,e] -> [B,N,h*e]
Var concat_rows(Var a, Var b);       // [B,p]+[B,q] -> [B,p+q]
Var concat_channels(Var a, Var b);   // [B,c1,H,W]+[B,c2,H,W] -> [B,c1+c2,H,W]

// Linear algebra.
Var matmul(Var a, Var b);            // [M,K]x[K,N]
Var bmm(Var a, Var b);               // [B,M,K]x[B,K,N]

// Broadcast adds and gates.
Var add_bias_rows(Var x, Var b);            // [B,D] or [B,N,D] plus [D]
Var add_bias_nchw(Var x, Var b);            // [B,C,H,W] plus [C]
Var add_bias_sample_channel(Var x, Var b);  // [B,C,H,W] plus [B,C]
Var add_token_broadcast(Var x, Var y);      // [B,N,D] plus [B,1,D]
Var mul_gate_channel(Var x, Var g);         // [B,C,H,W] * [B,C]
Var mul_gate_spatial(Var x, Var g);         // [B,C,H,W] * [B,1,H,W]

// Reductions.
Var sum_all(Var a);        // -> [1]
Var mean_all(Var a);       // -> [1]
Var logsumexp_rows(Var a); // [B,N] -> [B]
Var diag2(Var a);          // [B,B] -> [B]
Var gap2d(Var x);          // [B,C,H,W] -> [B,C], spatial mean
Var spatial_max(Var x);    // [B,C,H,W] -> [B,C]
Var channel_mean(Var x);   // [B,C,H,W] -> [B,1,H,W]
Var channel_max(Var x);    // [B,C,H,W] -> [B,1,H,W]
Var avg_pool2(Var x);      // [B,C,H,W] -> [B,C,H/2,W/2], H and W even

// Neural-net building blocks.
Var softmax_last(Var a);   // rank 2 or 3
Var layernorm_last(Var x, Var gamma, Var beta, double eps = 1e-5);
Var row_normalize(Var x, double guard = 1e-12);  // rows of [B,D] to unit norm
Var conv2d(Var x, Var w, Var b, int stride, int pad);
Var upsample_nearest2(Var x);
Var linear(Var x, Var w, Var b);  // x rank 2 or 3, w [D,E], b [E]
Var bce_logits(Var logits, const Tensor& targets);  // mean over elements
Var mse(Var a, Var b);
Var mae(Var a, Var b);

}  // namespace vf

#endif  // VF_CORE_OPS_HPP_
