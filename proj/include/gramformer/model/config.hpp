// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace gramformer::model {

enum class Variant {
  gramformer,  // post-softmax edge modulation + centrality encoding
  vanilla,     // plain multi-head softmax attention
  graphormer,  // pre-softmax learned k-NN edge bias + centrality encoding
};

std::string_view to_string(Variant v);
/// Throws ContractError on an unknown name.
Variant parse_variant(std::string_view name);

struct ModelConfig {
  std::size_t channels = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  double q = 0.3;         // neighbour fraction
  std::size_t m = 18;     // in-degree bound, bank holds m + 1 vectors
  double lambda = 0.1;    // edge regularization weight
  std::size_t patch = 8;  // encoder patch stride in pixels
  double density_sigma = 2.0;
  double ln_eps = 1e-5;
  Variant variant = Variant::gramformer;
  // Ablation switches; only meaningful for the non-vanilla variants.
  bool use_ewr = true;
  bool use_centrality = true;

  /// Throws ContractError naming the first violated constraint.
  void validate() const;

  bool ewr_active() const noexcept { return variant == Variant::gramformer && use_ewr; }
  bool centrality_active() const noexcept { return variant != Variant::vanilla && use_centrality; }
  bool edge_bias_active() const noexcept { return variant == Variant::graphormer; }
  /// Density maps come out at 2× the node grid, i.e. image / (patch / 2).
  std::size_t density_stride() const noexcept { return patch / 2; }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace gramformer::model
