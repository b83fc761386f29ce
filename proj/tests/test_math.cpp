// tests/test_math.cpp

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

#include <doctest.h>

#include <cmath>

#include "core/archive.hpp"
#include "core/hash.hpp"
#include "core/ops.hpp"
#include "nn/layers.hpp"
#include "testutil.hpp"

using namespace vf;
using vftest::grad_check;
using vftest::randn_var;

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  Tensor r = t.reshaped({3, 2});
  CHECK(r.at(2, 1) == 5.0);
  CHECK_THROWS_AS(t.reshaped({4, 2}), Error);
}

TEST_CASE("rng determinism and moments") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomStream c(7);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = c.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.03);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("seed_split: stable and label-sensitive") {
  CHECK(seed_split(1, "a", 0) == seed_split(1, "a", 0));
  CHECK(seed_split(1, "a", 0) != seed_split(1, "a", 1));
  CHECK(seed_split(1, "a", 0) != seed_split(1, "b", 0));
  CHECK(seed_split(1, "a", 0) != seed_split(2, "a", 0));
}

TEST_CASE("autograd: chained elementwise") {
  RandomStream rng(1);
  Var x = randn_var({3, 4}, rng);
  auto f = [&]() { return mean_all(mul(sigmoid(x), tanh_op(scale(x, 0.5)))); };
  CHECK(grad_check(f, {x}, rng) < 1e-6);
}

TEST_CASE("autograd: duplicated parent accumulates") {
  RandomStream rng(2);
  Var x = randn_var({5}, rng);
  auto f = [&]() { return sum_all(mul(x, x)); };
  for (auto& p : {x}) (void)p;
  x.zero_grad();
  Var loss = f();
  backward(loss);
  for (i64 i = 0; i < 5; ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 * x.val()[i]));
}

TEST_CASE("op gradients: pointwise family") {
  RandomStream rng(3);
  Var x = randn_var({2, 6}, rng);
  // Shift away from relu/abs kinks.
  for (i64 i = 0; i < x.val().numel(); ++i)
    if (std::abs(x.val()[i]) < 0.05) x.mutable_value()[i] += 0.2;
  auto mk = [&](Var (*op)(Var)) {
    return [&x, op]() { return mean_all(square(op(x))); };
  };
  CHECK(grad_check(mk(&relu), {x}, rng) < 1e-6);
  CHECK(grad_check(mk(&sigmoid), {x}, rng) < 1e-6);
  CHECK(grad_check(mk(&tanh_op), {x}, rng) < 1e-6);
  CHECK(grad_check(mk(&exp_op), {x}, rng) < 1e-6);
  CHECK(grad_check(mk(&abs_op), {x}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(log_op(add_const(square(x), 1.0))); }, {x}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(reciprocal(add_const(square(x), 1.0))); }, {x}, rng) <
        1e-6);
}

TEST_CASE("op gradients: matmul, bmm, linear") {
  RandomStream rng(4);
  Var a = randn_var({3, 4}, rng), b = randn_var({4, 5}, rng);
  CHECK(grad_check([&]() { return mean_all(square(matmul(a, b))); }, {a, b}, rng) < 1e-6);

  Var ba = randn_var({2, 3, 4}, rng), bb = randn_var({2, 4, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(bmm(ba, bb))); }, {ba, bb}, rng) < 1e-6);

  Var x = randn_var({3, 4}, rng), w = randn_var({4, 2}, rng), bias = randn_var({2}, rng);
  CHECK(grad_check([&]() { return mean_all(square(linear(x, w, bias))); }, {x, w, bias}, rng) <
        1e-6);
  Var x3 = randn_var({2, 3, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(linear(x3, w, bias))); }, {x3, w, bias}, rng) <
        1e-6);
}

TEST_CASE("op gradients: shape moves and broadcasts") {
  RandomStream rng(5);
  Var x = randn_var({2, 3, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(transpose_last2(x))); }, {x}, rng) < 1e-6);
  Var m = randn_var({3, 5}, rng);
  CHECK(grad_check([&]() { return mean_all(square(transpose2(m))); }, {m}, rng) < 1e-6);

  Var img = randn_var({2, 3, 4, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(to_tokens(img))); }, {img}, rng) < 1e-6);
  Var tok = randn_var({2, 16, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(from_tokens(tok, 4, 4))); }, {tok}, rng) < 1e-6);
  Var heads_in = randn_var({2, 5, 6}, rng);
  CHECK(grad_check([&]() { return mean_all(square(split_heads(heads_in, 2))); }, {heads_in}, rng) <
        1e-6);
  Var heads_out = randn_var({4, 5, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(merge_heads(heads_out, 2))); }, {heads_out},
                   rng) < 1e-6);

  Var ca = randn_var({3, 2}, rng), cb = randn_var({3, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(concat_rows(ca, cb))); }, {ca, cb}, rng) < 1e-6);
  Var cc1 = randn_var({2, 2, 3, 3}, rng), cc2 = randn_var({2, 1, 3, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(concat_channels(cc1, cc2))); }, {cc1, cc2},
                   rng) < 1e-6);

  Var bias_d = randn_var({4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(add_bias_rows(x, bias_d))); }, {x, bias_d},
                   rng) < 1e-6);
  Var bc = randn_var({3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(add_bias_nchw(img, bc))); }, {img, bc}, rng) <
        1e-6);
  Var bsc = randn_var({2, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(add_bias_sample_channel(img, bsc))); },
                   {img, bsc}, rng) < 1e-6);
  Var tokb = randn_var({2, 1, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(add_token_broadcast(x, tokb))); }, {x, tokb},
                   rng) < 1e-6);
  Var gch = randn_var({2, 3}, rng);
  CHECK(grad_check([&]() { return mean_all(square(mul_gate_channel(img, gch))); }, {img, gch},
                   rng) < 1e-6);
  Var gsp = randn_var({2, 1, 4, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(mul_gate_spatial(img, gsp))); }, {img, gsp},
                   rng) < 1e-6);
  Var sv = randn_var({1}, rng);
  CHECK(grad_check([&]() { return mean_all(square(mul_scalar_var(x, sv))); }, {x, sv}, rng) < 1e-6);
}

TEST_CASE("op gradients: reductions and normalizations") {
  RandomStream rng(6);
  Var x = randn_var({3, 5}, rng);
  CHECK(grad_check([&]() { return mean_all(square(logsumexp_rows(x))); }, {x}, rng) < 1e-6);
  Var sq = randn_var({4, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(diag2(sq))); }, {sq}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(softmax_last(x))); }, {x}, rng) < 1e-6);

  Var img = randn_var({2, 3, 4, 4}, rng);
  CHECK(grad_check([&]() { return mean_all(square(gap2d(img))); }, {img}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(spatial_max(img))); }, {img}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(channel_mean(img))); }, {img}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(channel_max(img))); }, {img}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(avg_pool2(img))); }, {img}, rng) < 1e-6);
  CHECK(grad_check([&]() { return mean_all(square(upsample_nearest2(img))); }, {img}, rng) < 1e-6);

  Var g = randn_var({5}, rng), be = randn_var({5}, rng);
  CHECK(grad_check([&]() { return mean_all(square(layernorm_last(x, g, be))); }, {x, g, be}, rng) <
        1e-6);
  // Sum of squares of unit rows is constant, so probe through a random
  // linear functional instead.
  Var probe = randn_var({3, 5}, rng, false);
  CHECK(grad_check([&]() { return mean_all(mul(row_normalize(x), probe)); }, {x}, rng) < 1e-6);
}

TEST_CASE("softmax rows are probability vectors") {
  RandomStream rng(7);
  Var x = randn_var({4, 6}, rng, false);
  Var y = softmax_last(x);
  for (i64 i = 0; i < 4; ++i) {
    double s = 0.0;
    for (i64 j = 0; j < 6; ++j) {
      CHECK(y.val().at(i, j) >= 0.0);
      s += y.val().at(i, j);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("row_normalize rejects zero rows") {
  Var z = Var::leaf(Tensor::zeros({2, 3}), false);
  CHECK_THROWS_AS(row_normalize(z), NumericError);
}

TEST_CASE("conv2d matches naive reference") {
  RandomStream rng(8);
  const i64 B = 2, IC = 3, H = 5, W = 6, OC = 4, K = 3;
  const int stride = 2, pad = 1;
  Var x = randn_var({B, IC, H, W}, rng, false);
  Var w = randn_var({OC, IC, K, K}, rng, false);
  Var b = randn_var({OC}, rng, false);
  Var y = conv2d(x, w, b, stride, pad);
  i64 oh = (H + 2 * pad - K) / stride + 1, ow = (W + 2 * pad - K) / stride + 1;
  REQUIRE(y.val().shape() == std::vector<i64>{B, OC, oh, ow});
  for (i64 ib = 0; ib < B; ++ib)
    for (i64 oc = 0; oc < OC; ++oc)
      for (i64 i = 0; i < oh; ++i)
        for (i64 j = 0; j < ow; ++j) {
          double acc = b.val()[oc];
          for (i64 ic = 0; ic < IC; ++ic)
            for (i64 a = 0; a < K; ++a)
              for (i64 c = 0; c < K; ++c) {
                i64 si = i * stride + a - pad, sj = j * stride + c - pad;
                if (si >= 0 && si < H && sj >= 0 && sj < W)
                  acc += x.val().at(ib, ic, si, sj) * w.val().at(oc, ic, a, c);
              }
          CHECK(y.val().at(ib, oc, i, j) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("conv2d gradients (stride 1 and 2)") {
  RandomStream rng(9);
  for (int stride : {1, 2}) {
    Var x = randn_var({2, 2, 5, 5}, rng);
    Var w = randn_var({3, 2, 3, 3}, rng);
    Var b = randn_var({3}, rng);
    auto f = [&]() { return mean_all(square(conv2d(x, w, b, stride, 1))); };
    CHECK(grad_check(f, {x, w, b}, rng) < 1e-6);
  }
}

TEST_CASE("bce_logits value and gradient") {
  RandomStream rng(10);
  Var x = randn_var({6}, rng);
  Tensor t({6});
  for (i64 i = 0; i < 6; ++i) t[i] = (i % 2 == 0) ? 1.0 : 0.0;
  Var loss = bce_logits(x, t);
  double expect = 0.0;
  for (i64 i = 0; i < 6; ++i) {
    double z = x.val()[i];
    expect += std::max(z, 0.0) - z * t[i] + std::log1p(std::exp(-std::abs(z)));
  }
  CHECK(loss.val()[0] == doctest::Approx(expect / 6.0).epsilon(1e-12));
  CHECK(grad_check([&]() { return bce_logits(x, t); }, {x}, rng) < 1e-6);
}

TEST_CASE("adam: zero lr leaves params unchanged, steps are deterministic") {
  RandomStream rng(11);
  Var p = randn_var({4}, rng);
  Tensor before = p.val();
  nn::Adam opt;
  opt.add_group({p}, 0.0);
  for (int i = 0; i < 3; ++i) {
    opt.zero_grad();
    backward(mean_all(square(p)));
    opt.step();
  }
  CHECK(t_max_abs_diff(before, p.val()) == 0.0);

  auto run = [&](u64 seed) {
    RandomStream r(seed);
    Var q = randn_var({8}, r);
    nn::Adam o;
    o.add_group({q}, 1e-2);
    for (int i = 0; i < 20; ++i) {
      o.zero_grad();
      backward(mean_all(square(q)));
      o.step();
    }
    return q.val();
  };
  CHECK(t_max_abs_diff(run(5), run(5)) == 0.0);
}

TEST_CASE("archive round trip") {
  RandomStream rng(12);
  Archive a;
  a.kind = "test";
  a.meta["x"] = 3;
  a.add("w", Tensor::randn({3, 4}, rng));
  a.add("b", Tensor::randn({7}, rng));
  std::string path = "/tmp/vf_test_archive.bin";
  a.save(path);
  Archive b2 = Archive::load(path);
  CHECK(b2.kind == "test");
  CHECK(b2.meta.at("x").get<int>() == 3);
  CHECK(t_max_abs_diff(b2.get("w"), a.get("w")) == 0.0);
  CHECK(t_max_abs_diff(b2.get("b"), a.get("b")) == 0.0);
  CHECK(b2.has("w"));
  CHECK(!b2.has("nope"));
}
