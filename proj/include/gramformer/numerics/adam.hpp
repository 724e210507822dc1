// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gramformer/numerics/tensor.hpp"

namespace gramformer {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates, one pair per parameter tensor, plus the
/// step counter used for bias correction.
struct AdamState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

/// One Adam update over `params` using their attached gradients. Tensors
/// without a gradient are treated as having a zero gradient. The state is
/// sized on first use and must then keep seeing the same parameter list.
void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamConfig& config);

}  // namespace gramformer
