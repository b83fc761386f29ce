// core/tensor.hpp

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

#ifndef VF_CORE_TENSOR_HPP_
#define VF_CORE_TENSOR_HPP_

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace vf {

// Dense row-major tensor of doubles, rank <= 4. All numerics in the
// project run in double precision; model sizes are small enough that the
// cost is acceptable and it keeps gradient checks and ordered reductions
// tight.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<i64> shape);
  Tensor(std::vector<i64> shape, std::vector<double> data);

  static Tensor zeros(std::vector<i64> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<i64> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }
  static Tensor randn(std::vector<i64> shape, RandomStream& rng);

  const std::vector<i64>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  i64 dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  i64 numel() const { return static_cast<i64>(data_.size()); }
  bool defined() const { return !shape_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](i64 i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](i64 i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(i64 i, i64 j) { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
  double at(i64 i, i64 j) const { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
  double& at(i64 i, i64 j, i64 k) {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double at(i64 i, i64 j, i64 k) const {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double& at(i64 i, i64 j, i64 k, i64 l) {
    return data_[static_cast<std::size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  double at(i64 i, i64 j, i64 k, i64 l) const {
    return data_[static_cast<std::size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  Tensor reshaped(std::vector<i64> new_shape) const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  bool all_finite() const;
  double min() const;
  double max() const;
  double sum() const;
  double mean() const { return numel() > 0 ? sum() / static_cast<double>(numel()) : 0.0; }

 private:
  std::vector<i64> shape_;
  std::vector<double> data_;
};

i64 numel_of(const std::vector<i64>& shape);

// Elementwise helpers on plain tensors (no autograd), used by the
// diffusion math and samplers where gradients are never needed.
Tensor t_add(const Tensor& a, const Tensor& b);
Tensor t_sub(const Tensor& a, const Tensor& b);
Tensor t_scale(const Tensor& a, double c);
Tensor t_axpy(double alpha, const Tensor& x, const Tensor& y);  // alpha*x + y
double t_dot(const Tensor& a, const Tensor& b);
double t_l1_dist(const Tensor& a, const Tensor& b);
double t_l2_dist(const Tensor& a, const Tensor& b);
double t_max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace vf

#endif  // VF_CORE_TENSOR_HPP_
