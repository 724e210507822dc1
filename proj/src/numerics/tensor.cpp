// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "gramformer/numerics/errors.hpp"

namespace gramformer {

std::string shape_string(const Shape& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

static void check_dims(const Shape& dims) {
  if (dims.empty()) throw ShapeError("tensor needs at least one dimension");
  for (auto d : dims) {
    if (d == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(dims));
  }
}

Tensor::Tensor(Shape dims, double fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(shape_size(dims_), fill);
}

Tensor::Tensor(Shape dims, std::vector<double> values)
    : dims_(std::move(dims)), data_(std::move(values)) {
  check_dims(dims_);
  if (shape_size(dims_) != data_.size()) {
    throw ShapeError("shape " + shape_string(dims_) + " does not hold " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::reshaped(Shape dims) const {
  if (shape_size(dims) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(dims_) + " to " + shape_string(dims));
  }
  return Tensor(std::move(dims), data_);
}

std::span<double> Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gramformer
