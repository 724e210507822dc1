// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace gramformer::diagnostics {

/// Counting errors over a test set. `mse` follows the crowd-counting
/// convention and is the root of the mean squared error.
struct ErrorReport {
  double mae = 0.0;
  double mse = 0.0;
  double nae = 0.0;
  std::size_t samples = 0;
  std::size_t nae_excluded = 0;  // samples with zero ground truth
};

/// Throws ContractError on empty or unequal-length inputs.
ErrorReport error_metrics(std::span<const double> predicted, std::span<const double> truth);

}  // namespace gramformer::diagnostics
