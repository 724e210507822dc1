// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gramformer/model/model.hpp"

namespace gramformer::diagnostics {

/// Average normalized variance of attention rows. A row a with Σa > 0 is
/// rescaled to â = N·a/Σa (mean 1) and scored by the population variance of
/// â. Uniform rows score 0; one-hot rows score N − 1.
struct AnvarReport {
  std::vector<std::vector<double>> per_head;  // [layer][head], mean row score
  double overall = 0.0;                       // mean over every scored row
  std::size_t nodes = 0;
  std::size_t rows_scored = 0;
  std::size_t rows_skipped = 0;               // rows summing to zero
  bool degenerate() const noexcept { return rows_scored == 0; }
};

/// Score of a single row; nullopt when the row sums to zero.
std::optional<double> normalized_row_variance(std::span<const double> row);

/// Sums row scores over any number of traces, then averages.
class AnvarAccumulator {
 public:
  void add(const std::vector<std::vector<Tensor>>& attention);
  void add(const model::ForwardTrace& trace) { add(trace.attention); }
  AnvarReport report() const;

 private:
  std::vector<std::vector<double>> sum_;
  std::vector<std::vector<std::size_t>> count_;
  std::size_t nodes_ = 0;
  std::size_t skipped_ = 0;
};

/// Throws ContractError when the trace holds no attention maps.
AnvarReport anvar(const model::ForwardTrace& trace);
AnvarReport anvar(const std::vector<std::vector<Tensor>>& attention);

}  // namespace gramformer::diagnostics
