// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/loss.hpp"

#include <cmath>
#include <string>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/ops.hpp"

namespace gramformer::model {

Var MseCountLoss::operator()(Var pred, const Tensor& target) const {
  if (pred.dims() != target.dims()) {
    throw ShapeError("density loss: prediction " + shape_string(pred.dims()) + " vs target " +
                     shape_string(target.dims()));
  }
  const auto p = pred.value().values();
  const auto g = target.values();
  const double count_norm = 1.0;
  double sq = 0.0, sum_p = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    sq += d * d;
    sum_p += p[i];
    sum_g += g[i];
  }
  const double inv_pixels = 1.0 / static_cast<double>(p.size());
  const double count_scale = 1.0 / (sum_g + count_norm);
  const double count_diff = sum_p - sum_g;
  const double value = sq * inv_pixels + std::fabs(count_diff) * count_scale;

  std::vector<double> residual(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) residual[i] = p[i] - g[i];
  const double count_sign = count_diff > 0.0 ? 1.0 : (count_diff < 0.0 ? -1.0 : 0.0);
  return pred.tape->record(
      "mse_count_loss", Tensor::scalar(value), {pred},
      [pred, residual = std::move(residual), inv_pixels, count_scale, count_sign](Tape& t, std::span<const double> go) {
        auto gp = t.grad(pred);
        const double count_term = count_sign * count_scale;
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go[0] * (2.0 * residual[i] * inv_pixels + count_term);
      });
}

std::unique_ptr<DensityLoss> make_density_loss(std::string_view name) {
  if (name == "mse_count") return std::make_unique<MseCountLoss>();
  throw ContractError("unknown loss '" + std::string(name) + "'");
}

std::vector<std::string_view> density_loss_names() { return {"mse_count"}; }

Var total_loss(Var data_loss, std::optional<Var> regularization, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("total_loss: lambda must be non-negative");
  if (!regularization || lambda == 0.0) return data_loss;
  return ops::add(data_loss, ops::scale(*regularization, lambda));
}

}  // namespace gramformer::model
