// core/tensor.cpp

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

#include "core/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace vf {

i64 numel_of(const std::vector<i64>& shape) {
  i64 n = 1;
  for (i64 d : shape) {
    VF_CHECK(d >= 0, "negative dimension");
    n *= d;
  }
  return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<i64> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(numel_of(shape_)), 0.0) {
  VF_CHECK(shape_.size() >= 1 && shape_.size() <= 4, "tensor rank must be 1..4");
}

Tensor::Tensor(std::vector<i64> shape, std::vector<double> data) : shape_(std::move(shape)) {
  VF_CHECK(shape_.size() >= 1 && shape_.size() <= 4, "tensor rank must be 1..4");
  VF_CHECK(static_cast<i64>(data.size()) == numel_of(shape_), "data size mismatch");
  data_ = std::move(data);
}

Tensor Tensor::full(std::vector<i64> shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

Tensor Tensor::randn(std::vector<i64> shape, RandomStream& rng) {
  Tensor t(std::move(shape));
  for (auto& x : t.data_) x = rng.normal();
  return t;
}

Tensor Tensor::reshaped(std::vector<i64> new_shape) const {
  VF_CHECK(numel_of(new_shape) == numel(), "reshape changes element count");
  Tensor t;
  t.shape_ = std::move(new_shape);
  t.data_ = data_;
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Tensor::min() const {
  VF_CHECK(!data_.empty(), "min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
  VF_CHECK(!data_.empty(), "max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
  double s = 0.0;
  for (double x : data_) s += x;
  return s;
}

Tensor t_add(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_add shape mismatch");
  Tensor out = a;
  for (i64 i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

Tensor t_sub(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_sub shape mismatch");
  Tensor out = a;
  for (i64 i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

Tensor t_scale(const Tensor& a, double c) {
  Tensor out = a;
  for (i64 i = 0; i < out.numel(); ++i) out[i] *= c;
  return out;
}

Tensor t_axpy(double alpha, const Tensor& x, const Tensor& y) {
  VF_CHECK(x.same_shape(y), "t_axpy shape mismatch");
  Tensor out = y;
  for (i64 i = 0; i < out.numel(); ++i) out[i] += alpha * x[i];
  return out;
}

double t_dot(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_dot shape mismatch");
  double s = 0.0;
  for (i64 i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

double t_l1_dist(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_l1_dist shape mismatch");
  double s = 0.0;
  for (i64 i = 0; i < a.numel(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double t_l2_dist(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_l2_dist shape mismatch");
  double s = 0.0;
  for (i64 i = 0; i < a.numel(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double t_max_abs_diff(const Tensor& a, const Tensor& b) {
  VF_CHECK(a.same_shape(b), "t_max_abs_diff shape mismatch");
  double m = 0.0;
  for (i64 i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace vf
