// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gramformer/numerics/errors.hpp"

namespace gramformer {

namespace {

// Derivatives below this are indistinguishable from finite-difference noise.
constexpr double kScaleFloor = 1e-10;

}  // namespace

GradCheckReport grad_check(const GradCheckTarget& target, double step, double tolerance) {
  const double base = target.evaluate();
  if (target.evaluate() != base) {
    throw ContractError("grad_check: loss closure is not deterministic");
  }

  for (const auto& p : target.params) p.tensor->zero_grad();
  target.compute_gradients();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : target.params) {
    if (p.tensor->has_grad()) {
      analytic.emplace_back(p.tensor->grad().begin(), p.tensor->grad().end());
    } else {
      analytic.emplace_back(p.tensor->size(), 0.0);
    }
  }

  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  for (std::size_t k = 0; k < target.params.size(); ++k) {
    Tensor& t = *target.params[k].tensor;
    ParamGradError err;
    err.name = target.params[k].name;
    err.entries = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double up = target.evaluate();
      t[i] = saved - step;
      const double down = target.evaluate();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      err.max_abs_error = std::max(err.max_abs_error, std::fabs(numeric - analytic[k][i]));
      err.max_abs_numeric = std::max(err.max_abs_numeric, std::fabs(numeric));
    }
    err.rel_error = err.max_abs_error / std::max(err.max_abs_numeric, kScaleFloor);
    report.params.push_back(std::move(err));
  }
  std::stable_sort(report.params.begin(), report.params.end(),
                   [](const ParamGradError& a, const ParamGradError& b) { return a.rel_error > b.rel_error; });
  return report;
}

}  // namespace gramformer
