// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/diagnostics/metrics.hpp"

#include <cmath>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::diagnostics {

ErrorReport error_metrics(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.empty()) throw ContractError("error_metrics: no samples");
  if (predicted.size() != truth.size()) throw ContractError("error_metrics: prediction and truth lengths differ");
  ErrorReport r;
  r.samples = predicted.size();
  double abs_sum = 0.0, sq_sum = 0.0, rel_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = std::fabs(predicted[i] - truth[i]);
    abs_sum += d;
    sq_sum += d * d;
    if (truth[i] > 0.0) {
      rel_sum += d / truth[i];
    } else {
      ++r.nae_excluded;
    }
  }
  const double n = static_cast<double>(r.samples);
  r.mae = abs_sum / n;
  r.mse = std::sqrt(sq_sum / n);
  const std::size_t rel_n = r.samples - r.nae_excluded;
  r.nae = rel_n > 0 ? rel_sum / static_cast<double>(rel_n) : 0.0;
  return r;
}

}  // namespace gramformer::diagnostics
