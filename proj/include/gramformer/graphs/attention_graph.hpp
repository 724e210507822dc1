// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gramformer/numerics/tape.hpp"

namespace gramformer::graphs {

/// Node layout of a feature map: node i sits at row i / width, column i % width.
struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t nodes() const noexcept { return height * width; }
  std::size_t row_of(std::size_t node) const noexcept { return node / width; }
  std::size_t col_of(std::size_t node) const noexcept { return node % width; }
  bool operator==(const GridShape&) const = default;
};

/// One edge-weight regressor: conv3×3 (C→C/2), ReLU, conv3×3 (C/2→1), sigmoid.
struct EwrHeadParams {
  Var conv1_weight;
  Var conv1_bias;
  Var conv2_weight;
  Var conv2_bias;
};

/// Per-head scalar semantic value of every node, each in (0, 1).
struct SemanticField {
  std::vector<Var> heads;  // each of shape [N]
  GridShape grid;

  std::size_t head_count() const noexcept { return heads.size(); }
};

/// Per-head N×N modulation matrices E^s, E^s_ij = |f^s_i − f^s_j|.
struct AttentionGraph {
  std::vector<Var> edges;  // each of shape [N×N]

  std::size_t head_count() const noexcept { return edges.size(); }
};

/// Runs every head's regressor over the initial node features laid out on `grid`.
SemanticField ewr_forward(Var nodes, GridShape grid, std::span<const EwrHeadParams> heads);

AttentionGraph build_attention_graph(const SemanticField& field);

/// Mean over heads and nodes of the squared deviation from the node's row mean.
/// Zero exactly when every head is constant along every grid row.
Var edge_regularization(const SemanticField& field);

}  // namespace gramformer::graphs
