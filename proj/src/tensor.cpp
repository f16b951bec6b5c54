// SPDX-License-Identifier: Apache-2.0
#include "consnet/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace consnet {

Tensor::Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0 || (rows == 0) != (cols == 0)) {
    throw std::invalid_argument("Tensor: bad shape " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  data_.assign(static_cast<std::size_t>(rows) * cols, real{0});
}

Tensor::Tensor(int rows, int cols, std::vector<real> data) : rows_(rows), cols_(cols) {
  if (data.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("Tensor: data length does not match shape");
  }
  data_ = std::move(data);
}

Tensor Tensor::zeros(int rows, int cols) { return Tensor(rows, cols); }

Tensor Tensor::full(int rows, int cols, real value) {
  Tensor t(rows, cols);
  for (auto& x : t.data_) x = value;
  return t;
}

Tensor Tensor::scalar(real value) { return Tensor(1, 1, {value}); }

Tensor Tensor::row(std::vector<real> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Tensor::all_finite() const {
  for (real x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

real Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) {
    throw std::logic_error("Tensor::item on non-scalar " + shape_str());
  }
  return data_[0];
}

real dot(std::span<const real> a, std::span<const real> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  real acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

real l2_norm(std::span<const real> a) { return std::sqrt(dot(a, a)); }

}  // namespace consnet
