// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gramformer/graphs/attention_graph.hpp"
#include "gramformer/graphs/centrality.hpp"
#include "gramformer/numerics/tape.hpp"

namespace gramformer::model {

using graphs::GridShape;

struct EncodedNodes {
  Var nodes;  // N×C
  GridShape grid;
};

/// Non-overlapping patch flattening of a Ci×H×W image followed by an affine
/// map to C channels and ReLU. Node order is row-major over the patch grid.
EncodedNodes patch_encode(Var image, std::size_t patch, Var weight, Var bias);

struct AttentionParams {
  std::vector<Var> query;  // per head, C×(C/S)
  std::vector<Var> key;
  std::vector<Var> value;
  Var out;  // C×C
  Var norm_gain;
  Var norm_bias;
};

struct FeedForwardParams {
  Var fc1_weight;  // C×2C
  Var fc1_bias;
  Var fc2_weight;  // 2C×C
  Var fc2_bias;
  Var norm_gain;
  Var norm_bias;
};

struct EdgeMlpParams {
  Var fc1_weight;  // 2C×C, rows [0, C) act on the source node, [C, 2C) on the target
  Var fc1_bias;
  Var fc2_weight;  // C×1
  Var fc2_bias;
};

/// What modulates one attention layer. Any member may be left empty.
struct AttentionContext {
  /// Post-softmax multiplicative edge weights, one N×N matrix per head.
  const graphs::AttentionGraph* graph = nullptr;
  /// Centrality embedding: index per node into `bank`.
  std::span<const std::size_t> centrality_index;
  Var bank;
  /// Pre-softmax additive N×N bias shared by all heads.
  std::optional<Var> logit_bias;
  double ln_eps = 1e-5;
};

struct AttentionOutput {
  Var nodes;                   // Ṽ, N×C
  std::vector<Var> attention;  // per head, N×N, after modulation
};

/// One attention block:
///   v̂ = v + bank[index]
///   A^s = softmax((v̂ W_Q^s)(v̂ W_K^s)ᵀ / √C + bias)
///   R^s = E^s ⊙ A^s                       (rows are not renormalized)
///   Ṽ = LN(v + concat_s[R^s (v W_v^s)] W_o)
/// Values use the unmodulated v; queries and keys use v̂.
AttentionOutput attention_layer(Var nodes, const AttentionParams& params, const AttentionContext& context);

/// LN(x + fc2(relu(fc1(x)))).
Var feed_forward(Var nodes, const FeedForwardParams& params, double ln_eps);

/// Learned edge bias ẽ_ij = MLP([v_i, v_j]) for j in neighbors[i], 0 elsewhere.
Var edge_bias(Var nodes, const graphs::NeighborSets& neighbors, const EdgeMlpParams& params);

struct HeadParams {
  Var conv1_weight;  // C/2×C×3×3
  Var conv1_bias;
  Var conv2_weight;  // C/4×C/2×3×3
  Var conv2_bias;
  Var conv3_weight;  // 1×C/4 (1×1 conv)
  Var conv3_bias;
};

/// Nodes → C×H×W, upsample 2×, conv3×3+ReLU, conv3×3+ReLU, conv1×1, ReLU.
/// Returns the 1×2H×2W density map.
Var regression_head(Var nodes, GridShape grid, const HeadParams& params);

}  // namespace gramformer::model
