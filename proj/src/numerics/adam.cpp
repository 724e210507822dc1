// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/adam.hpp"

#include <cmath>

#include "gramformer/numerics/errors.hpp"

namespace gramformer {

void adam_step(std::span<Tensor* const> params, AdamState& state, const AdamConfig& config) {
  if (state.first.empty()) {
    for (const Tensor* p : params) {
      state.first.emplace_back(p->size(), 0.0);
      state.second.emplace_back(p->size(), 0.0);
    }
  }
  if (state.first.size() != params.size()) {
    throw ContractError("adam_step: optimizer state tracks " + std::to_string(state.first.size()) +
                        " tensors, got " + std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    if (!p.has_grad()) continue;
    auto& m = state.first[k];
    auto& v = state.second[k];
    if (m.size() != p.size()) throw ContractError("adam_step: parameter size changed between steps");
    const auto g = p.grad();
    auto w = p.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / correct1;
      const double vhat = v[i] / correct2;
      w[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace gramformer
