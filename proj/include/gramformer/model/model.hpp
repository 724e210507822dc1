// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gramformer/graphs/attention_graph.hpp"
#include "gramformer/graphs/centrality.hpp"
#include "gramformer/model/config.hpp"
#include "gramformer/model/layers.hpp"
#include "gramformer/model/parameters.hpp"

namespace gramformer::model {

/// Values captured during a forward pass, for diagnostics.
struct ForwardTrace {
  GridShape grid;
  std::vector<Tensor> layer_inputs;                // V^l, l = 0..L-1
  std::vector<std::vector<Tensor>> attention;      // [layer][head], N×N after modulation
  std::vector<graphs::NeighborSets> neighbors;     // [layer]
  std::vector<std::vector<std::size_t>> centrality_index;  // [layer], empty when unused
  std::vector<Tensor> semantic_field;              // [head], N values, empty when EWR is off
  std::vector<Tensor> attention_graph;             // [head], N×N, empty when EWR is off
  Tensor density;
};

struct ForwardOptions {
  /// Use these neighbour sets instead of recomputing k-NN at each layer.
  /// Makes the forward a smooth function of the parameters (grad checking).
  const std::vector<graphs::NeighborSets>* frozen_neighbors = nullptr;
  bool keep_trace = true;
};

struct ForwardResult {
  Var density;                       // 1×2H×2W
  std::optional<Var> regularization; // edge regularization, when EWR is active
  ForwardTrace trace;
  std::vector<graphs::NeighborSets> neighbors;  // what each layer actually used
};

/// Parameter tensors bound onto one tape.
struct BoundParameters {
  Var encoder_weight;
  Var encoder_bias;
  std::vector<graphs::EwrHeadParams> ewr;
  Var bank;
  std::vector<AttentionParams> attention;
  std::vector<FeedForwardParams> ffn;
  std::vector<EdgeMlpParams> edge_mlp;
  HeadParams head;
};

BoundParameters bind_parameters(Tape& tape, ParameterStore& store, const ModelConfig& config);

/// Runs the L transformer layers from initial nodes v⁰. The attention graph is
/// built once from v⁰ and reused at every layer; neighbour sets and centrality
/// indices are recomputed from each layer's input.
struct TransformerOutput {
  Var nodes;
  std::optional<Var> regularization;
  ForwardTrace trace;
  std::vector<graphs::NeighborSets> neighbors;
};
TransformerOutput transformer_forward(Var initial_nodes, GridShape grid, const BoundParameters& params,
                                      const ModelConfig& config, const ForwardOptions& options = {});

class GramformerModel {
 public:
  GramformerModel(ModelConfig config, ParameterStore params);
  static GramformerModel create(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

  /// image: 1×H×W with H and W divisible by the patch stride.
  ForwardResult forward(Tape& tape, const Tensor& image, const ForwardOptions& options = {});

 private:
  ModelConfig config_;
  ParameterStore params_;
};

}  // namespace gramformer::model
