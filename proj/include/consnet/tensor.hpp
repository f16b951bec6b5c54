// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace consnet {

#ifdef CONSNET_REAL_FLOAT
using real = float;
#else
using real = double;
#endif

/// Dense row-major matrix. Row vectors are 1xN, scalars 1x1.
class Tensor {
public:
  Tensor() = default;
  Tensor(int rows, int cols);
  Tensor(int rows, int cols, std::vector<real> data);

  static Tensor zeros(int rows, int cols);
  static Tensor full(int rows, int cols, real value);
  static Tensor scalar(real value);
  static Tensor row(std::vector<real> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  real& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  real at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  real& operator[](int i) { return data_[i]; }
  real operator[](int i) const { return data_[i]; }

  real* data() { return data_.data(); }
  const real* data() const { return data_.data(); }
  const std::vector<real>& values() const { return data_; }

  std::span<const real> row_span(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  bool all_finite() const;

  /// Value of a 1x1 tensor; throws on any other shape.
  real item() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<real> data_;
};

real dot(std::span<const real> a, std::span<const real> b);
real l2_norm(std::span<const real> a);

}  // namespace consnet
