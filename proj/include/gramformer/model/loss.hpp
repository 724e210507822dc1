// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "gramformer/numerics/tape.hpp"

namespace gramformer::model {

/// Supervision between a predicted and a ground-truth density map. New losses
/// plug in through make_density_loss.
class DensityLoss {
 public:
  virtual ~DensityLoss() = default;
  virtual std::string_view name() const = 0;
  /// pred and target have identical shapes.
  virtual Var operator()(Var pred, const Tensor& target) const = 0;
};

/// mean((pred − gt)²) + |Σpred − Σgt| / (Σgt + 1)
class MseCountLoss final : public DensityLoss {
 public:
  std::string_view name() const override { return "mse_count"; }
  Var operator()(Var pred, const Tensor& target) const override;
};

/// Throws ContractError for unknown names.
std::unique_ptr<DensityLoss> make_density_loss(std::string_view name);
std::vector<std::string_view> density_loss_names();

/// data_loss + lambda · regularization (regularization absent counts as 0).
Var total_loss(Var data_loss, std::optional<Var> regularization, double lambda);

}  // namespace gramformer::model
