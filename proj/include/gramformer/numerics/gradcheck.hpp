// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gramformer/numerics/tensor.hpp"

namespace gramformer {

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

/// What grad_check needs from a model: a deterministic loss evaluation and an
/// analytic pass that leaves d(loss)/d(param) in each tensor's grad slot.
struct GradCheckTarget {
  std::function<double()> evaluate;
  std::function<void()> compute_gradients;
  std::vector<NamedTensor> params;
};

struct ParamGradError {
  std::string name;
  std::size_t entries = 0;
  /// max_i |analytic_i - numeric_i| / max(max_i |numeric_i|, floor)
  double rel_error = 0.0;
  double max_abs_error = 0.0;
  double max_abs_numeric = 0.0;
};

struct GradCheckReport {
  /// Sorted worst-first.
  std::vector<ParamGradError> params;
  double step = 0.0;
  double tolerance = 0.0;

  double worst() const { return params.empty() ? 0.0 : params.front().rel_error; }
  bool passed() const { return worst() < tolerance; }
};

/// Central differences (f(θ+h) − f(θ−h)) / 2h for every entry of every
/// parameter, compared tensor-wise against the analytic gradient. The error is
/// scaled by the largest numeric derivative in that tensor, so entries whose
/// true derivative is tiny are judged against the tensor's own scale.
/// Throws ContractError if two baseline evaluations disagree.
GradCheckReport grad_check(const GradCheckTarget& target, double step = 1e-5, double tolerance = 1e-4);

}  // namespace gramformer
