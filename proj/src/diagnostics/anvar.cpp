// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/diagnostics/anvar.hpp"

#include <string>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::diagnostics {

std::optional<double> normalized_row_variance(std::span<const double> row) {
  const double n = static_cast<double>(row.size());
  double total = 0.0;
  for (double v : row) total += v;
  if (!(total > 0.0)) return std::nullopt;
  const double scale = n / total;
  double mean = 0.0;
  for (double v : row) mean += v * scale;
  mean /= n;
  double var = 0.0;
  for (double v : row) {
    const double d = v * scale - mean;
    var += d * d;
  }
  return var / n;
}

void AnvarAccumulator::add(const std::vector<std::vector<Tensor>>& attention) {
  if (attention.empty()) throw ContractError("anvar: trace holds no attention maps");
  if (sum_.empty()) {
    for (const auto& layer : attention) {
      sum_.emplace_back(layer.size(), 0.0);
      count_.emplace_back(layer.size(), 0);
    }
  }
  if (attention.size() != sum_.size()) throw ContractError("anvar: layer count changed between traces");
  for (std::size_t l = 0; l < attention.size(); ++l) {
    if (attention[l].size() != sum_[l].size()) throw ContractError("anvar: head count changed between traces");
    for (std::size_t s = 0; s < attention[l].size(); ++s) {
      const Tensor& a = attention[l][s];
      if (a.rank() != 2 || a.dim(0) != a.dim(1)) throw ShapeError("anvar: attention must be N×N, got " + shape_string(a.dims()));
      const std::size_t n = a.dim(0);
      if (nodes_ == 0) nodes_ = n;
      if (n != nodes_) throw ContractError("anvar: node count changed between traces");
      for (std::size_t i = 0; i < n; ++i) {
        const auto score = normalized_row_variance(a.values().subspan(i * n, n));
        if (!score) {
          ++skipped_;
          continue;
        }
        sum_[l][s] += *score;
        ++count_[l][s];
      }
    }
  }
}

AnvarReport AnvarAccumulator::report() const {
  AnvarReport r;
  r.nodes = nodes_;
  r.rows_skipped = skipped_;
  double total = 0.0;
  for (std::size_t l = 0; l < sum_.size(); ++l) {
    r.per_head.emplace_back(sum_[l].size(), 0.0);
    for (std::size_t s = 0; s < sum_[l].size(); ++s) {
      if (count_[l][s] > 0) r.per_head[l][s] = sum_[l][s] / static_cast<double>(count_[l][s]);
      total += sum_[l][s];
      r.rows_scored += count_[l][s];
    }
  }
  if (r.rows_scored > 0) r.overall = total / static_cast<double>(r.rows_scored);
  return r;
}

AnvarReport anvar(const std::vector<std::vector<Tensor>>& attention) {
  AnvarAccumulator acc;
  acc.add(attention);
  return acc.report();
}

AnvarReport anvar(const model::ForwardTrace& trace) { return anvar(trace.attention); }

}  // namespace gramformer::diagnostics
