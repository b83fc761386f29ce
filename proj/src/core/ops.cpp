// core/ops.cpp

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

#include "core/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace vf {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

bool wants_grad(const AgNode& n, std::size_t i) { return n.parents[i]->requires_grad; }

template <typename F, typename DFDX>
Var pointwise(Var a, F f, DFDX dfdx) {
  const Tensor& x = a.val();
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = f(x[i]);
  return make_op(std::move(out), {a}, [dfdx](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    const Tensor& x = n.parents[0]->value;
    Tensor& dx = n.parents[0]->ensure_grad();
    const Tensor& y = n.value;
    const Tensor& dy = n.grad;
    for (i64 i = 0; i < x.numel(); ++i) dx[i] += dy[i] * dfdx(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  VF_CHECK(a.val().same_shape(b.val()), "add shape mismatch " + a.val().shape_str() + " vs " + b.val().shape_str());
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] += b.val()[i];
  return make_op(std::move(out), {a, b}, [](AgNode& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants_grad(n, k)) continue;
      Tensor& d = n.parents[k]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i];
    }
  });
}

Var sub(Var a, Var b) {
  VF_CHECK(a.val().same_shape(b.val()), "sub shape mismatch " + a.val().shape_str() + " vs " + b.val().shape_str());
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] -= b.val()[i];
  return make_op(std::move(out), {a, b}, [](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& d = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& d = n.parents[1]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] -= n.grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  VF_CHECK(a.val().same_shape(b.val()), "mul shape mismatch");
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] *= b.val()[i];
  return make_op(std::move(out), {a, b}, [](AgNode& n) {
    const Tensor& av = n.parents[0]->value;
    const Tensor& bv = n.parents[1]->value;
    if (wants_grad(n, 0)) {
      Tensor& d = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i] * bv[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& d = n.parents[1]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i] * av[i];
    }
  });
}

Var scale(Var a, double c) {
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] *= c;
  return make_op(std::move(out), {a}, [c](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < d.numel(); ++i) d[i] += c * n.grad[i];
  });
}

Var add_const(Var a, double c) {
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] += c;
  return make_op(std::move(out), {a}, [](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i];
  });
}

Var relu(Var a) {
  return pointwise(a, [](double x) { return x > 0.0 ? x : 0.0; },
                   [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return pointwise(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                   [](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(Var a) {
  return pointwise(a, [](double x) { return std::tanh(x); },
                   [](double, double y) { return 1.0 - y * y; });
}

Var exp_op(Var a) {
  return pointwise(a, [](double x) { return std::exp(x); },
                   [](double, double y) { return y; });
}

Var log_op(Var a) {
  return pointwise(a, [](double x) { return std::log(x); },
                   [](double x, double) { return 1.0 / x; });
}

Var abs_op(Var a) {
  return pointwise(a, [](double x) { return std::abs(x); },
                   [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var square(Var a) {
  return pointwise(a, [](double x) { return x * x; },
                   [](double x, double) { return 2.0 * x; });
}

Var clamp_op(Var a, double lo, double hi) {
  VF_CHECK(lo <= hi, "clamp bounds inverted");
  return pointwise(a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
                   [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var reciprocal(Var a) {
  return pointwise(a, [](double x) { return 1.0 / x; },
                   [](double, double y) { return -y * y; });
}

Var mul_scalar_var(Var a, Var s) {
  VF_CHECK(s.val().numel() == 1, "mul_scalar_var expects [1] scalar");
  double sv = s.val()[0];
  Tensor out = a.val();
  for (i64 i = 0; i < out.numel(); ++i) out[i] *= sv;
  return make_op(std::move(out), {a, s}, [](AgNode& n) {
    const Tensor& av = n.parents[0]->value;
    double sv = n.parents[1]->value[0];
    if (wants_grad(n, 0)) {
      Tensor& d = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i] * sv;
    }
    if (wants_grad(n, 1)) {
      double acc = 0.0;
      for (i64 i = 0; i < av.numel(); ++i) acc += n.grad[i] * av[i];
      n.parents[1]->ensure_grad()[0] += acc;
    }
  });
}

Var reshape(Var a, std::vector<i64> shape) {
  Tensor out = a.val().reshaped(std::move(shape));
  return make_op(std::move(out), {a}, [](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < d.numel(); ++i) d[i] += n.grad[i];
  });
}

Var transpose2(Var a) {
  const Tensor& x = a.val();
  VF_CHECK(x.rank() == 2, "transpose2 expects rank 2");
  i64 m = x.dim(0), nn = x.dim(1);
  Tensor out({nn, m});
  for (i64 i = 0; i < m; ++i)
    for (i64 j = 0; j < nn; ++j) out.at(j, i) = x.at(i, j);
  return make_op(std::move(out), {a}, [m, nn](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < m; ++i)
      for (i64 j = 0; j < nn; ++j) d.at(i, j) += n.grad.at(j, i);
  });
}

Var transpose_last2(Var a) {
  const Tensor& x = a.val();
  VF_CHECK(x.rank() == 3, "transpose_last2 expects rank 3");
  i64 b = x.dim(0), m = x.dim(1), nn = x.dim(2);
  Tensor out({b, nn, m});
  for (i64 k = 0; k < b; ++k)
    for (i64 i = 0; i < m; ++i)
      for (i64 j = 0; j < nn; ++j) out.at(k, j, i) = x.at(k, i, j);
  return make_op(std::move(out), {a}, [b, m, nn](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 k = 0; k < b; ++k)
      for (i64 i = 0; i < m; ++i)
        for (i64 j = 0; j < nn; ++j) d.at(k, i, j) += n.grad.at(k, j, i);
  });
}

Var to_tokens(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "to_tokens expects NCHW");
  i64 b = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  Tensor out({b, h * w, c});
  for (i64 ib = 0; ib < b; ++ib)
    for (i64 ic = 0; ic < c; ++ic)
      for (i64 ih = 0; ih < h; ++ih)
        for (i64 iw = 0; iw < w; ++iw) out.at(ib, ih * w + iw, ic) = v.at(ib, ic, ih, iw);
  return make_op(std::move(out), {x}, [b, c, h, w](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < b; ++ib)
      for (i64 ic = 0; ic < c; ++ic)
        for (i64 ih = 0; ih < h; ++ih)
          for (i64 iw = 0; iw < w; ++iw) d.at(ib, ic, ih, iw) += n.grad.at(ib, ih * w + iw, ic);
  });
}

Var from_tokens(Var x, i64 h, i64 w) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 3, "from_tokens expects [B,N,C]");
  i64 b = v.dim(0), nn = v.dim(1), c = v.dim(2);
  VF_CHECK(nn == h * w, "from_tokens token count mismatch");
  Tensor out({b, c, h, w});
  for (i64 ib = 0; ib < b; ++ib)
    for (i64 ic = 0; ic < c; ++ic)
      for (i64 ih = 0; ih < h; ++ih)
        for (i64 iw = 0; iw < w; ++iw) out.at(ib, ic, ih, iw) = v.at(ib, ih * w + iw, ic);
  return make_op(std::move(out), {x}, [b, c, h, w](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < b; ++ib)
      for (i64 ic = 0; ic < c; ++ic)
        for (i64 ih = 0; ih < h; ++ih)
          for (i64 iw = 0; iw < w; ++iw) d.at(ib, ih * w + iw, ic) += n.grad.at(ib, ic, ih, iw);
  });
}

Var split_heads(Var x, i64 heads) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 3, "split_heads expects [B,N,D]");
  i64 b = v.dim(0), nn = v.dim(1), d = v.dim(2);
  VF_CHECK(d % heads == 0, "split_heads: width not divisible by heads");
  i64 e = d / heads;
  Tensor out({b * heads, nn, e});
  for (i64 ib = 0; ib < b; ++ib)
    for (i64 in = 0; in < nn; ++in)
      for (i64 ih = 0; ih < heads; ++ih)
        for (i64 j = 0; j < e; ++j) out.at(ib * heads + ih, in, j) = v.at(ib, in, ih * e + j);
  return make_op(std::move(out), {x}, [b, nn, heads, e](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& dx = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < b; ++ib)
      for (i64 in = 0; in < nn; ++in)
        for (i64 ih = 0; ih < heads; ++ih)
          for (i64 j = 0; j < e; ++j)
            dx.at(ib, in, ih * e + j) += n.grad.at(ib * heads + ih, in, j);
  });
}

Var merge_heads(Var x, i64 heads) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 3, "merge_heads expects [B*h,N,e]");
  VF_CHECK(v.dim(0) % heads == 0, "merge_heads: batch not divisible by heads");
  i64 b = v.dim(0) / heads, nn = v.dim(1), e = v.dim(2);
  Tensor out({b, nn, heads * e});
  for (i64 ib = 0; ib < b; ++ib)
    for (i64 in = 0; in < nn; ++in)
      for (i64 ih = 0; ih < heads; ++ih)
        for (i64 j = 0; j < e; ++j) out.at(ib, in, ih * e + j) = v.at(ib * heads + ih, in, j);
  return make_op(std::move(out), {x}, [b, nn, heads, e](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& dx = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < b; ++ib)
      for (i64 in = 0; in < nn; ++in)
        for (i64 ih = 0; ih < heads; ++ih)
          for (i64 j = 0; j < e; ++j)
            dx.at(ib * heads + ih, in, j) += n.grad.at(ib, in, ih * e + j);
  });
}

Var concat_rows(Var a, Var b) {
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  VF_CHECK(av.rank() == 2 && bv.rank() == 2 && av.dim(0) == bv.dim(0), "concat_rows shape mismatch");
  i64 rows = av.dim(0), p = av.dim(1), q = bv.dim(1);
  Tensor out({rows, p + q});
  for (i64 i = 0; i < rows; ++i) {
    for (i64 j = 0; j < p; ++j) out.at(i, j) = av.at(i, j);
    for (i64 j = 0; j < q; ++j) out.at(i, p + j) = bv.at(i, j);
  }
  return make_op(std::move(out), {a, b}, [rows, p, q](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& d = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < rows; ++i)
        for (i64 j = 0; j < p; ++j) d.at(i, j) += n.grad.at(i, j);
    }
    if (wants_grad(n, 1)) {
      Tensor& d = n.parents[1]->ensure_grad();
      for (i64 i = 0; i < rows; ++i)
        for (i64 j = 0; j < q; ++j) d.at(i, j) += n.grad.at(i, p + j);
    }
  });
}

Var concat_channels(Var a, Var b) {
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  VF_CHECK(av.rank() == 4 && bv.rank() == 4, "concat_channels expects NCHW");
  VF_CHECK(av.dim(0) == bv.dim(0) && av.dim(2) == bv.dim(2) && av.dim(3) == bv.dim(3),
           "concat_channels shape mismatch");
  i64 nb = av.dim(0), c1 = av.dim(1), c2 = bv.dim(1), h = av.dim(2), w = av.dim(3);
  Tensor out({nb, c1 + c2, h, w});
  for (i64 ib = 0; ib < nb; ++ib) {
    for (i64 c = 0; c < c1; ++c)
      for (i64 i = 0; i < h; ++i)
        for (i64 j = 0; j < w; ++j) out.at(ib, c, i, j) = av.at(ib, c, i, j);
    for (i64 c = 0; c < c2; ++c)
      for (i64 i = 0; i < h; ++i)
        for (i64 j = 0; j < w; ++j) out.at(ib, c1 + c, i, j) = bv.at(ib, c, i, j);
  }
  return make_op(std::move(out), {a, b}, [nb, c1, c2, h, w](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& d = n.parents[0]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 c = 0; c < c1; ++c)
          for (i64 i = 0; i < h; ++i)
            for (i64 j = 0; j < w; ++j) d.at(ib, c, i, j) += n.grad.at(ib, c, i, j);
    }
    if (wants_grad(n, 1)) {
      Tensor& d = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 c = 0; c < c2; ++c)
          for (i64 i = 0; i < h; ++i)
            for (i64 j = 0; j < w; ++j) d.at(ib, c, i, j) += n.grad.at(ib, c1 + c, i, j);
    }
  });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  VF_CHECK(av.rank() == 2 && bv.rank() == 2 && av.dim(1) == bv.dim(0),
           "matmul shape mismatch " + av.shape_str() + " x " + bv.shape_str());
  i64 m = av.dim(0), k = av.dim(1), nn = bv.dim(1);
  Tensor out({m, nn});
  {
    CMapMat am(av.data(), m, k), bm(bv.data(), k, nn);
    MapMat om(out.data(), m, nn);
    om.noalias() = am * bm;
  }
  return make_op(std::move(out), {a, b}, [m, k, nn](AgNode& n) {
    CMapMat dy(n.grad.data(), m, nn);
    if (wants_grad(n, 0)) {
      CMapMat bm(n.parents[1]->value.data(), k, nn);
      MapMat da(n.parents[0]->ensure_grad().data(), m, k);
      da.noalias() += dy * bm.transpose();
    }
    if (wants_grad(n, 1)) {
      CMapMat am(n.parents[0]->value.data(), m, k);
      MapMat db(n.parents[1]->ensure_grad().data(), k, nn);
      db.noalias() += am.transpose() * dy;
    }
  });
}

Var bmm(Var a, Var b) {
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  VF_CHECK(av.rank() == 3 && bv.rank() == 3 && av.dim(0) == bv.dim(0) && av.dim(2) == bv.dim(1),
           "bmm shape mismatch " + av.shape_str() + " x " + bv.shape_str());
  i64 nb = av.dim(0), m = av.dim(1), k = av.dim(2), nn = bv.dim(2);
  Tensor out({nb, m, nn});
  for (i64 ib = 0; ib < nb; ++ib) {
    CMapMat am(av.data() + ib * m * k, m, k), bm(bv.data() + ib * k * nn, k, nn);
    MapMat om(out.data() + ib * m * nn, m, nn);
    om.noalias() = am * bm;
  }
  return make_op(std::move(out), {a, b}, [nb, m, k, nn](AgNode& n) {
    for (i64 ib = 0; ib < nb; ++ib) {
      CMapMat dy(n.grad.data() + ib * m * nn, m, nn);
      if (wants_grad(n, 0)) {
        CMapMat bm(n.parents[1]->value.data() + ib * k * nn, k, nn);
        MapMat da(n.parents[0]->ensure_grad().data() + ib * m * k, m, k);
        da.noalias() += dy * bm.transpose();
      }
      if (wants_grad(n, 1)) {
        CMapMat am(n.parents[0]->value.data() + ib * m * k, m, k);
        MapMat db(n.parents[1]->ensure_grad().data() + ib * k * nn, k, nn);
        db.noalias() += am.transpose() * dy;
      }
    }
  });
}

Var add_bias_rows(Var x, Var b) {
  const Tensor& xv = x.val();
  const Tensor& bv = b.val();
  VF_CHECK((xv.rank() == 2 || xv.rank() == 3) && bv.rank() == 1, "add_bias_rows rank mismatch");
  i64 d = xv.dim(xv.rank() - 1);
  VF_CHECK(bv.dim(0) == d, "add_bias_rows width mismatch");
  i64 rows = xv.numel() / d;
  Tensor out = xv;
  for (i64 r = 0; r < rows; ++r)
    for (i64 j = 0; j < d; ++j) out[r * d + j] += bv[j];
  return make_op(std::move(out), {x, b}, [rows, d](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < dx.numel(); ++i) dx[i] += n.grad[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& db = n.parents[1]->ensure_grad();
      for (i64 r = 0; r < rows; ++r)
        for (i64 j = 0; j < d; ++j) db[j] += n.grad[r * d + j];
    }
  });
}

Var add_bias_nchw(Var x, Var b) {
  const Tensor& xv = x.val();
  const Tensor& bv = b.val();
  VF_CHECK(xv.rank() == 4 && bv.rank() == 1 && bv.dim(0) == xv.dim(1), "add_bias_nchw mismatch");
  i64 nb = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor out = xv;
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      double bc = bv[ic];
      double* p = out.data() + (ib * c + ic) * hw;
      for (i64 i = 0; i < hw; ++i) p[i] += bc;
    }
  return make_op(std::move(out), {x, b}, [nb, c, hw](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < dx.numel(); ++i) dx[i] += n.grad[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& db = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 ic = 0; ic < c; ++ic) {
          const double* p = n.grad.data() + (ib * c + ic) * hw;
          double acc = 0.0;
          for (i64 i = 0; i < hw; ++i) acc += p[i];
          db[ic] += acc;
        }
    }
  });
}

Var add_bias_sample_channel(Var x, Var b) {
  const Tensor& xv = x.val();
  const Tensor& bv = b.val();
  VF_CHECK(xv.rank() == 4 && bv.rank() == 2 && bv.dim(0) == xv.dim(0) && bv.dim(1) == xv.dim(1),
           "add_bias_sample_channel mismatch");
  i64 nb = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor out = xv;
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      double bc = bv.at(ib, ic);
      double* p = out.data() + (ib * c + ic) * hw;
      for (i64 i = 0; i < hw; ++i) p[i] += bc;
    }
  return make_op(std::move(out), {x, b}, [nb, c, hw](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < dx.numel(); ++i) dx[i] += n.grad[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& db = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 ic = 0; ic < c; ++ic) {
          const double* p = n.grad.data() + (ib * c + ic) * hw;
          double acc = 0.0;
          for (i64 i = 0; i < hw; ++i) acc += p[i];
          db.at(ib, ic) += acc;
        }
    }
  });
}

Var add_token_broadcast(Var x, Var y) {
  const Tensor& xv = x.val();
  const Tensor& yv = y.val();
  VF_CHECK(xv.rank() == 3 && yv.rank() == 3 && yv.dim(1) == 1 && yv.dim(0) == xv.dim(0) &&
               yv.dim(2) == xv.dim(2),
           "add_token_broadcast mismatch");
  i64 nb = xv.dim(0), nn = xv.dim(1), d = xv.dim(2);
  Tensor out = xv;
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 in = 0; in < nn; ++in)
      for (i64 j = 0; j < d; ++j) out.at(ib, in, j) += yv.at(ib, 0, j);
  return make_op(std::move(out), {x, y}, [nb, nn, d](AgNode& n) {
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 i = 0; i < dx.numel(); ++i) dx[i] += n.grad[i];
    }
    if (wants_grad(n, 1)) {
      Tensor& dy = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 in = 0; in < nn; ++in)
          for (i64 j = 0; j < d; ++j) dy.at(ib, 0, j) += n.grad.at(ib, in, j);
    }
  });
}

Var mul_gate_channel(Var x, Var g) {
  const Tensor& xv = x.val();
  const Tensor& gv = g.val();
  VF_CHECK(xv.rank() == 4 && gv.rank() == 2 && gv.dim(0) == xv.dim(0) && gv.dim(1) == xv.dim(1),
           "mul_gate_channel mismatch");
  i64 nb = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor out = xv;
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      double gc = gv.at(ib, ic);
      double* p = out.data() + (ib * c + ic) * hw;
      for (i64 i = 0; i < hw; ++i) p[i] *= gc;
    }
  return make_op(std::move(out), {x, g}, [nb, c, hw](AgNode& n) {
    const Tensor& xv = n.parents[0]->value;
    const Tensor& gv = n.parents[1]->value;
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 ic = 0; ic < c; ++ic) {
          double gc = gv.at(ib, ic);
          const double* pg = n.grad.data() + (ib * c + ic) * hw;
          double* pd = dx.data() + (ib * c + ic) * hw;
          for (i64 i = 0; i < hw; ++i) pd[i] += pg[i] * gc;
        }
    }
    if (wants_grad(n, 1)) {
      Tensor& dg = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 ic = 0; ic < c; ++ic) {
          const double* pg = n.grad.data() + (ib * c + ic) * hw;
          const double* px = xv.data() + (ib * c + ic) * hw;
          double acc = 0.0;
          for (i64 i = 0; i < hw; ++i) acc += pg[i] * px[i];
          dg.at(ib, ic) += acc;
        }
    }
  });
}

Var mul_gate_spatial(Var x, Var g) {
  const Tensor& xv = x.val();
  const Tensor& gv = g.val();
  VF_CHECK(xv.rank() == 4 && gv.rank() == 4 && gv.dim(0) == xv.dim(0) && gv.dim(1) == 1 &&
               gv.dim(2) == xv.dim(2) && gv.dim(3) == xv.dim(3),
           "mul_gate_spatial mismatch");
  i64 nb = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor out = xv;
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      const double* pg = gv.data() + ib * hw;
      double* p = out.data() + (ib * c + ic) * hw;
      for (i64 i = 0; i < hw; ++i) p[i] *= pg[i];
    }
  return make_op(std::move(out), {x, g}, [nb, c, hw](AgNode& n) {
    const Tensor& xv = n.parents[0]->value;
    const Tensor& gv = n.parents[1]->value;
    if (wants_grad(n, 0)) {
      Tensor& dx = n.parents[0]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 ic = 0; ic < c; ++ic) {
          const double* pg = gv.data() + ib * hw;
          const double* pd = n.grad.data() + (ib * c + ic) * hw;
          double* po = dx.data() + (ib * c + ic) * hw;
          for (i64 i = 0; i < hw; ++i) po[i] += pd[i] * pg[i];
        }
    }
    if (wants_grad(n, 1)) {
      Tensor& dg = n.parents[1]->ensure_grad();
      for (i64 ib = 0; ib < nb; ++ib)
        for (i64 i = 0; i < hw; ++i) {
          double acc = 0.0;
          for (i64 ic = 0; ic < c; ++ic)
            acc += n.grad[(ib * c + ic) * hw + i] * xv[(ib * c + ic) * hw + i];
          dg[ib * hw + i] += acc;
        }
    }
  });
}

Var sum_all(Var a) {
  Tensor out({1}, {a.val().sum()});
  return make_op(std::move(out), {a}, [](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    double g = n.grad[0];
    for (i64 i = 0; i < d.numel(); ++i) d[i] += g;
  });
}

Var mean_all(Var a) {
  i64 nel = a.val().numel();
  Tensor out({1}, {a.val().sum() / static_cast<double>(nel)});
  return make_op(std::move(out), {a}, [nel](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    double g = n.grad[0] / static_cast<double>(nel);
    for (i64 i = 0; i < d.numel(); ++i) d[i] += g;
  });
}

Var logsumexp_rows(Var a) {
  const Tensor& x = a.val();
  VF_CHECK(x.rank() == 2, "logsumexp_rows expects rank 2");
  i64 b = x.dim(0), nn = x.dim(1);
  Tensor out({b});
  for (i64 i = 0; i < b; ++i) {
    double m = x.at(i, 0);
    for (i64 j = 1; j < nn; ++j) m = std::max(m, x.at(i, j));
    double s = 0.0;
    for (i64 j = 0; j < nn; ++j) s += std::exp(x.at(i, j) - m);
    out[i] = m + std::log(s);
  }
  return make_op(std::move(out), {a}, [b, nn](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    const Tensor& x = n.parents[0]->value;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < b; ++i) {
      double lse = n.value[i];
      double g = n.grad[i];
      for (i64 j = 0; j < nn; ++j) d.at(i, j) += g * std::exp(x.at(i, j) - lse);
    }
  });
}

Var diag2(Var a) {
  const Tensor& x = a.val();
  VF_CHECK(x.rank() == 2 && x.dim(0) == x.dim(1), "diag2 expects square matrix");
  i64 b = x.dim(0);
  Tensor out({b});
  for (i64 i = 0; i < b; ++i) out[i] = x.at(i, i);
  return make_op(std::move(out), {a}, [b](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < b; ++i) d.at(i, i) += n.grad[i];
  });
}

Var gap2d(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "gap2d expects NCHW");
  i64 nb = v.dim(0), c = v.dim(1), hw = v.dim(2) * v.dim(3);
  Tensor out({nb, c});
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      const double* p = v.data() + (ib * c + ic) * hw;
      double acc = 0.0;
      for (i64 i = 0; i < hw; ++i) acc += p[i];
      out.at(ib, ic) = acc / static_cast<double>(hw);
    }
  return make_op(std::move(out), {x}, [nb, c, hw](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 ic = 0; ic < c; ++ic) {
        double g = n.grad.at(ib, ic) / static_cast<double>(hw);
        double* p = d.data() + (ib * c + ic) * hw;
        for (i64 i = 0; i < hw; ++i) p[i] += g;
      }
  });
}

Var spatial_max(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "spatial_max expects NCHW");
  i64 nb = v.dim(0), c = v.dim(1), hw = v.dim(2) * v.dim(3);
  Tensor out({nb, c});
  auto argmax = std::make_shared<std::vector<i64>>(static_cast<std::size_t>(nb * c));
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic) {
      const double* p = v.data() + (ib * c + ic) * hw;
      i64 best = 0;
      for (i64 i = 1; i < hw; ++i)
        if (p[i] > p[best]) best = i;
      (*argmax)[static_cast<std::size_t>(ib * c + ic)] = best;
      out.at(ib, ic) = p[best];
    }
  return make_op(std::move(out), {x}, [nb, c, hw, argmax](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 ic = 0; ic < c; ++ic)
        d[(ib * c + ic) * hw + (*argmax)[static_cast<std::size_t>(ib * c + ic)]] +=
            n.grad.at(ib, ic);
  });
}

Var channel_mean(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "channel_mean expects NCHW");
  i64 nb = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  i64 hw = h * w;
  Tensor out({nb, 1, h, w});
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 i = 0; i < hw; ++i) {
      double acc = 0.0;
      for (i64 ic = 0; ic < c; ++ic) acc += v[(ib * c + ic) * hw + i];
      out[ib * hw + i] = acc / static_cast<double>(c);
    }
  return make_op(std::move(out), {x}, [nb, c, hw](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 i = 0; i < hw; ++i) {
        double g = n.grad[ib * hw + i] / static_cast<double>(c);
        for (i64 ic = 0; ic < c; ++ic) d[(ib * c + ic) * hw + i] += g;
      }
  });
}

Var channel_max(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "channel_max expects NCHW");
  i64 nb = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  i64 hw = h * w;
  Tensor out({nb, 1, h, w});
  auto argmax = std::make_shared<std::vector<i64>>(static_cast<std::size_t>(nb * hw));
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 i = 0; i < hw; ++i) {
      i64 best = 0;
      double bv = v[(ib * c + 0) * hw + i];
      for (i64 ic = 1; ic < c; ++ic) {
        double xv = v[(ib * c + ic) * hw + i];
        if (xv > bv) {
          bv = xv;
          best = ic;
        }
      }
      (*argmax)[static_cast<std::size_t>(ib * hw + i)] = best;
      out[ib * hw + i] = bv;
    }
  return make_op(std::move(out), {x}, [nb, c, hw, argmax](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 i = 0; i < hw; ++i) {
        i64 ic = (*argmax)[static_cast<std::size_t>(ib * hw + i)];
        d[(ib * c + ic) * hw + i] += n.grad[ib * hw + i];
      }
  });
}

Var avg_pool2(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4 && v.dim(2) % 2 == 0 && v.dim(3) % 2 == 0,
           "avg_pool2 expects even spatial dims");
  i64 nb = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  i64 oh = h / 2, ow = w / 2;
  Tensor out({nb, c, oh, ow});
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic)
      for (i64 i = 0; i < oh; ++i)
        for (i64 j = 0; j < ow; ++j)
          out.at(ib, ic, i, j) = 0.25 * (v.at(ib, ic, 2 * i, 2 * j) + v.at(ib, ic, 2 * i, 2 * j + 1) +
                                         v.at(ib, ic, 2 * i + 1, 2 * j) +
                                         v.at(ib, ic, 2 * i + 1, 2 * j + 1));
  return make_op(std::move(out), {x}, [nb, c, oh, ow](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 ic = 0; ic < c; ++ic)
        for (i64 i = 0; i < oh; ++i)
          for (i64 j = 0; j < ow; ++j) {
            double g = 0.25 * n.grad.at(ib, ic, i, j);
            d.at(ib, ic, 2 * i, 2 * j) += g;
            d.at(ib, ic, 2 * i, 2 * j + 1) += g;
            d.at(ib, ic, 2 * i + 1, 2 * j) += g;
            d.at(ib, ic, 2 * i + 1, 2 * j + 1) += g;
          }
  });
}

Var softmax_last(Var a) {
  const Tensor& x = a.val();
  VF_CHECK(x.rank() == 2 || x.rank() == 3, "softmax_last expects rank 2 or 3");
  i64 d = x.dim(x.rank() - 1);
  i64 rows = x.numel() / d;
  Tensor out = x;
  for (i64 r = 0; r < rows; ++r) {
    double* p = out.data() + r * d;
    double m = p[0];
    for (i64 j = 1; j < d; ++j) m = std::max(m, p[j]);
    double s = 0.0;
    for (i64 j = 0; j < d; ++j) {
      p[j] = std::exp(p[j] - m);
      s += p[j];
    }
    for (i64 j = 0; j < d; ++j) p[j] /= s;
  }
  return make_op(std::move(out), {a}, [rows, d](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& dx = n.parents[0]->ensure_grad();
    for (i64 r = 0; r < rows; ++r) {
      const double* y = n.value.data() + r * d;
      const double* dy = n.grad.data() + r * d;
      double dot = 0.0;
      for (i64 j = 0; j < d; ++j) dot += dy[j] * y[j];
      double* p = dx.data() + r * d;
      for (i64 j = 0; j < d; ++j) p[j] += y[j] * (dy[j] - dot);
    }
  });
}

Var layernorm_last(Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = x.val();
  VF_CHECK(xv.rank() >= 2, "layernorm_last expects rank >= 2");
  i64 d = xv.dim(xv.rank() - 1);
  VF_CHECK(gamma.val().numel() == d && beta.val().numel() == d, "layernorm_last affine mismatch");
  i64 rows = xv.numel() / d;
  Tensor out(xv.shape());
  auto stats = std::make_shared<Tensor>(Tensor({rows, 2}));  // mean, inv-sigma
  for (i64 r = 0; r < rows; ++r) {
    const double* p = xv.data() + r * d;
    double mu = 0.0;
    for (i64 j = 0; j < d; ++j) mu += p[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (i64 j = 0; j < d; ++j) {
      double t = p[j] - mu;
      var += t * t;
    }
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    stats->at(r, 0) = mu;
    stats->at(r, 1) = inv;
    double* q = out.data() + r * d;
    for (i64 j = 0; j < d; ++j) q[j] = (p[j] - mu) * inv * gamma.val()[j] + beta.val()[j];
  }
  return make_op(std::move(out), {x, gamma, beta}, [rows, d, stats](AgNode& n) {
    const Tensor& xv = n.parents[0]->value;
    const Tensor& gv = n.parents[1]->value;
    for (i64 r = 0; r < rows; ++r) {
      const double* p = xv.data() + r * d;
      const double* dy = n.grad.data() + r * d;
      double mu = stats->at(r, 0), inv = stats->at(r, 1);
      if (wants_grad(n, 0)) {
        double m1 = 0.0, m2 = 0.0;
        for (i64 j = 0; j < d; ++j) {
          double xhat = (p[j] - mu) * inv;
          double dyh = dy[j] * gv[j];
          m1 += dyh;
          m2 += dyh * xhat;
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        Tensor& dx = n.parents[0]->ensure_grad();
        double* q = dx.data() + r * d;
        for (i64 j = 0; j < d; ++j) {
          double xhat = (p[j] - mu) * inv;
          double dyh = dy[j] * gv[j];
          q[j] += inv * (dyh - m1 - xhat * m2);
        }
      }
      if (wants_grad(n, 1)) {
        Tensor& dg = n.parents[1]->ensure_grad();
        for (i64 j = 0; j < d; ++j) dg[j] += dy[j] * (p[j] - mu) * inv;
      }
      if (wants_grad(n, 2)) {
        Tensor& db = n.parents[2]->ensure_grad();
        for (i64 j = 0; j < d; ++j) db[j] += dy[j];
      }
    }
  });
}

Var row_normalize(Var x, double guard) {
  const Tensor& xv = x.val();
  VF_CHECK(xv.rank() == 2, "row_normalize expects [B,D]");
  i64 b = xv.dim(0), d = xv.dim(1);
  Tensor out = xv;
  auto norms = std::make_shared<std::vector<double>>(static_cast<std::size_t>(b));
  for (i64 i = 0; i < b; ++i) {
    double* p = out.data() + i * d;
    double s = 0.0;
    for (i64 j = 0; j < d; ++j) s += p[j] * p[j];
    double r = std::sqrt(s);
    VF_CHECK_NUMERIC(r > guard, "row_normalize: zero-norm embedding row");
    (*norms)[static_cast<std::size_t>(i)] = r;
    for (i64 j = 0; j < d; ++j) p[j] /= r;
  }
  return make_op(std::move(out), {x}, [b, d, norms](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    const Tensor& xv = n.parents[0]->value;
    Tensor& dx = n.parents[0]->ensure_grad();
    for (i64 i = 0; i < b; ++i) {
      double r = (*norms)[static_cast<std::size_t>(i)];
      const double* p = xv.data() + i * d;
      const double* dy = n.grad.data() + i * d;
      double dot = 0.0;
      for (i64 j = 0; j < d; ++j) dot += p[j] * dy[j];
      double r3 = r * r * r;
      double* q = dx.data() + i * d;
      for (i64 j = 0; j < d; ++j) q[j] += dy[j] / r - p[j] * dot / r3;
    }
  });
}

namespace {

void im2col(const double* x, i64 ic, i64 h, i64 w, i64 kh, i64 kw, i64 oh, i64 ow, int stride,
            int pad, double* col) {
  // col is (ic*kh*kw) x (oh*ow), row-major.
  for (i64 c = 0; c < ic; ++c)
    for (i64 a = 0; a < kh; ++a)
      for (i64 b = 0; b < kw; ++b) {
        double* dst = col + ((c * kh + a) * kw + b) * oh * ow;
        for (i64 i = 0; i < oh; ++i) {
          i64 src_i = i * stride + a - pad;
          for (i64 j = 0; j < ow; ++j) {
            i64 src_j = j * stride + b - pad;
            dst[i * ow + j] = (src_i >= 0 && src_i < h && src_j >= 0 && src_j < w)
                                  ? x[(c * h + src_i) * w + src_j]
                                  : 0.0;
          }
        }
      }
}

void col2im_add(const double* col, i64 ic, i64 h, i64 w, i64 kh, i64 kw, i64 oh, i64 ow,
                int stride, int pad, double* x) {
  for (i64 c = 0; c < ic; ++c)
    for (i64 a = 0; a < kh; ++a)
      for (i64 b = 0; b < kw; ++b) {
        const double* src = col + ((c * kh + a) * kw + b) * oh * ow;
        for (i64 i = 0; i < oh; ++i) {
          i64 dst_i = i * stride + a - pad;
          if (dst_i < 0 || dst_i >= h) continue;
          for (i64 j = 0; j < ow; ++j) {
            i64 dst_j = j * stride + b - pad;
            if (dst_j < 0 || dst_j >= w) continue;
            x[(c * h + dst_i) * w + dst_j] += src[i * ow + j];
          }
        }
      }
}

}  // namespace

Var conv2d(Var x, Var w, Var b, int stride, int pad) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  const Tensor& bv = b.val();
  VF_CHECK(xv.rank() == 4 && wv.rank() == 4, "conv2d expects NCHW input and OIHW weight");
  VF_CHECK(xv.dim(1) == wv.dim(1),
           "conv2d channel mismatch " + xv.shape_str() + " vs " + wv.shape_str());
  VF_CHECK(stride >= 1 && pad >= 0, "conv2d bad stride/pad");
  i64 nb = xv.dim(0), ic = xv.dim(1), h = xv.dim(2), ww = xv.dim(3);
  i64 oc = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
  VF_CHECK(bv.rank() == 1 && bv.dim(0) == oc, "conv2d bias mismatch");
  i64 oh = (h + 2 * pad - kh) / stride + 1;
  i64 ow = (ww + 2 * pad - kw) / stride + 1;
  VF_CHECK(oh >= 1 && ow >= 1, "conv2d output would be empty");
  i64 k = ic * kh * kw, ohw = oh * ow;

  Tensor out({nb, oc, oh, ow});
  std::vector<double> col(static_cast<std::size_t>(k * ohw));
  CMapMat wm(wv.data(), oc, k);
  for (i64 ib = 0; ib < nb; ++ib) {
    im2col(xv.data() + ib * ic * h * ww, ic, h, ww, kh, kw, oh, ow, stride, pad, col.data());
    CMapMat cm(col.data(), k, ohw);
    MapMat om(out.data() + ib * oc * ohw, oc, ohw);
    om.noalias() = wm * cm;
    for (i64 c = 0; c < oc; ++c) {
      double bc = bv[c];
      double* p = out.data() + (ib * oc + c) * ohw;
      for (i64 i = 0; i < ohw; ++i) p[i] += bc;
    }
  }

  auto dims = std::make_shared<std::array<i64, 9>>(
      std::array<i64, 9>{nb, ic, h, ww, oc, kh, kw, oh, ow});
  return make_op(std::move(out), {x, w, b}, [dims, stride, pad](AgNode& n) {
    auto [nb, ic, h, ww, oc, kh, kw, oh, ow] = *dims;
    i64 k = ic * kh * kw, ohw = oh * ow;
    const Tensor& xv = n.parents[0]->value;
    const Tensor& wv = n.parents[1]->value;
    std::vector<double> col(static_cast<std::size_t>(k * ohw));
    bool need_dx = wants_grad(n, 0), need_dw = wants_grad(n, 1), need_db = wants_grad(n, 2);
    CMapMat wm(wv.data(), oc, k);
    for (i64 ib = 0; ib < nb; ++ib) {
      CMapMat dy(n.grad.data() + ib * oc * ohw, oc, ohw);
      if (need_dw) {
        im2col(xv.data() + ib * ic * h * ww, ic, h, ww, kh, kw, oh, ow, stride, pad, col.data());
        CMapMat cm(col.data(), k, ohw);
        MapMat dw(n.parents[1]->ensure_grad().data(), oc, k);
        dw.noalias() += dy * cm.transpose();
      }
      if (need_dx) {
        MapMat cm(col.data(), k, ohw);
        cm.noalias() = wm.transpose() * dy;
        col2im_add(col.data(), ic, h, ww, kh, kw, oh, ow, stride, pad,
                   n.parents[0]->ensure_grad().data() + ib * ic * h * ww);
      }
      if (need_db) {
        Tensor& db = n.parents[2]->ensure_grad();
        for (i64 c = 0; c < oc; ++c) {
          const double* p = n.grad.data() + (ib * oc + c) * ohw;
          double acc = 0.0;
          for (i64 i = 0; i < ohw; ++i) acc += p[i];
          db[c] += acc;
        }
      }
    }
  });
}

Var upsample_nearest2(Var x) {
  const Tensor& v = x.val();
  VF_CHECK(v.rank() == 4, "upsample_nearest2 expects NCHW");
  i64 nb = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  Tensor out({nb, c, 2 * h, 2 * w});
  for (i64 ib = 0; ib < nb; ++ib)
    for (i64 ic = 0; ic < c; ++ic)
      for (i64 i = 0; i < h; ++i)
        for (i64 j = 0; j < w; ++j) {
          double xv = v.at(ib, ic, i, j);
          out.at(ib, ic, 2 * i, 2 * j) = xv;
          out.at(ib, ic, 2 * i, 2 * j + 1) = xv;
          out.at(ib, ic, 2 * i + 1, 2 * j) = xv;
          out.at(ib, ic, 2 * i + 1, 2 * j + 1) = xv;
        }
  return make_op(std::move(out), {x}, [nb, c, h, w](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    Tensor& d = n.parents[0]->ensure_grad();
    for (i64 ib = 0; ib < nb; ++ib)
      for (i64 ic = 0; ic < c; ++ic)
        for (i64 i = 0; i < h; ++i)
          for (i64 j = 0; j < w; ++j)
            d.at(ib, ic, i, j) += n.grad.at(ib, ic, 2 * i, 2 * j) +
                                  n.grad.at(ib, ic, 2 * i, 2 * j + 1) +
                                  n.grad.at(ib, ic, 2 * i + 1, 2 * j) +
                                  n.grad.at(ib, ic, 2 * i + 1, 2 * j + 1);
  });
}

Var linear(Var x, Var w, Var b) {
  const Tensor& xv = x.val();
  VF_CHECK(xv.rank() == 2 || xv.rank() == 3, "linear expects rank 2 or 3 input");
  if (xv.rank() == 2) return add_bias_rows(matmul(x, w), b);
  i64 nb = xv.dim(0), nn = xv.dim(1), d = xv.dim(2);
  i64 e = w.val().dim(1);
  Var flat = reshape(x, {nb * nn, d});
  Var y = add_bias_rows(matmul(flat, w), b);
  return reshape(y, {nb, nn, e});
}

Var bce_logits(Var logits, const Tensor& targets) {
  const Tensor& x = logits.val();
  VF_CHECK(x.same_shape(targets), "bce_logits shape mismatch");
  i64 nel = x.numel();
  double loss = 0.0;
  for (i64 i = 0; i < nel; ++i) {
    double z = x[i], t = targets[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor out({1}, {loss / static_cast<double>(nel)});
  auto tgt = std::make_shared<Tensor>(targets);
  return make_op(std::move(out), {logits}, [nel, tgt](AgNode& n) {
    if (!wants_grad(n, 0)) return;
    const Tensor& x = n.parents[0]->value;
    Tensor& d = n.parents[0]->ensure_grad();
    double g = n.grad[0] / static_cast<double>(nel);
    for (i64 i = 0; i < nel; ++i) {
      double s = 1.0 / (1.0 + std::exp(-x[i]));
      d[i] += g * (s - (*tgt)[i]);
    }
  });
}

Var mse(Var a, Var b) { return mean_all(square(sub(a, b))); }

Var mae(Var a, Var b) { return mean_all(abs_op(sub(a, b))); }

}  // namespace vf
