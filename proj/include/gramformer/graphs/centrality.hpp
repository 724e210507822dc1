// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gramformer/numerics/tape.hpp"

namespace gramformer::graphs {

/// neighbors[i] lists the k nearest other nodes of node i, nearest first.
using NeighborSets = std::vector<std::vector<std::size_t>>;

/// k = max(1, round(q·N)), capped at N − 1 because a node never selects itself.
std::size_t neighbor_count(std::size_t nodes, double q);

/// Exact Euclidean k-NN over the rows of an N×C matrix. Ties in distance go
/// to the lower node index. Requires N ≥ 2 and 0 < q ≤ 1.
NeighborSets knn_neighbors(const Tensor& nodes, double q);
NeighborSets knn_neighbors_k(const Tensor& nodes, std::size_t k);

/// In-degree of every node in the neighbour graph and its bank index.
struct CentralityState {
  NeighborSets neighbors;
  std::vector<std::size_t> occurrences;
  std::vector<std::size_t> index;  // each in [0, m]
};

/// occurrences = in-degrees. If max ≤ m the index equals the in-degree,
/// otherwise floor(occ · m / max(occ)).
CentralityState centrality_indices(NeighborSets neighbors, std::size_t m);

/// output_i = nodes_i + bank[index_i]. Gradients reach the nodes and are
/// scatter-added into the selected bank rows.
Var centrality_embed(Var nodes, std::span<const std::size_t> index, Var bank);

}  // namespace gramformer::graphs
