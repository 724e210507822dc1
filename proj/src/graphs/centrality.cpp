// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/graphs/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::graphs {

std::size_t neighbor_count(std::size_t nodes, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw ContractError("neighbor fraction q must lie in (0, 1], got " + std::to_string(q));
  if (nodes < 2) throw ContractError("k-NN needs at least 2 nodes, got " + std::to_string(nodes));
  const auto k = static_cast<std::size_t>(std::llround(q * static_cast<double>(nodes)));
  return std::clamp<std::size_t>(k, 1, nodes - 1);
}

NeighborSets knn_neighbors(const Tensor& nodes, double q) {
  if (nodes.rank() != 2) throw ShapeError("knn_neighbors: expected N×C features, got " + shape_string(nodes.dims()));
  return knn_neighbors_k(nodes, neighbor_count(nodes.dim(0), q));
}

NeighborSets knn_neighbors_k(const Tensor& nodes, std::size_t k) {
  if (nodes.rank() != 2) throw ShapeError("knn_neighbors: expected N×C features, got " + shape_string(nodes.dims()));
  const std::size_t n = nodes.dim(0);
  const std::size_t c = nodes.dim(1);
  if (n < 2) throw ContractError("k-NN needs at least 2 nodes, got " + std::to_string(n));
  if (k < 1 || k > n - 1) throw ContractError("k-NN: k=" + std::to_string(k) + " outside [1, N-1]");

  NeighborSets out(n);
  const double* x = nodes.storage().data();
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * n * c > (1u << 16))
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t t = 0; t < c; ++t) {
        const double d = x[i * c + t] - x[j * c + t];
        d2 += d * d;
      }
      cand.emplace_back(d2, j);
    }
    // Pair ordering compares distance first, then index: the tie rule.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    auto& row = out[i];
    row.reserve(k);
    for (std::size_t r = 0; r < k; ++r) row.push_back(cand[r].second);
  }
  return out;
}

CentralityState centrality_indices(NeighborSets neighbors, std::size_t m) {
  if (m < 1) throw ContractError("centrality bound m must be at least 1");
  CentralityState state;
  const std::size_t n = neighbors.size();
  state.occurrences.assign(n, 0);
  for (const auto& set : neighbors)
    for (std::size_t j : set) {
      if (j >= n) throw ContractError("neighbour id " + std::to_string(j) + " out of range");
      ++state.occurrences[j];
    }
  const std::size_t top = n ? *std::max_element(state.occurrences.begin(), state.occurrences.end()) : 0;
  state.index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.index[i] = top <= m ? state.occurrences[i] : state.occurrences[i] * m / top;
  }
  state.neighbors = std::move(neighbors);
  return state;
}

Var centrality_embed(Var nodes, std::span<const std::size_t> index, Var bank) {
  const Tensor& nv = nodes.value();
  const Tensor& bv = bank.value();
  if (nv.rank() != 2 || bv.rank() != 2 || nv.dim(1) != bv.dim(1)) {
    throw ShapeError("centrality_embed: nodes " + shape_string(nv.dims()) + " vs bank " + shape_string(bv.dims()));
  }
  const std::size_t n = nv.dim(0);
  const std::size_t c = nv.dim(1);
  if (index.size() != n) throw ContractError("centrality_embed: one index per node required");
  for (std::size_t i : index) {
    if (i >= bv.dim(0)) {
      throw ContractError("centrality_embed: index " + std::to_string(i) + " outside bank of " +
                          std::to_string(bv.dim(0)) + " vectors");
    }
  }
  Tensor out = nv;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bv[index[i] * c + j];
  std::vector<std::size_t> idx(index.begin(), index.end());
  return nodes.tape->record("centrality_embed", std::move(out), {nodes, bank},
                            [nodes, bank, idx = std::move(idx), c](Tape& t, std::span<const double> g) {
                              if (t.requires_grad(nodes)) {
                                auto gn = t.grad(nodes);
                                for (std::size_t i = 0; i < g.size(); ++i) gn[i] += g[i];
                              }
                              if (t.requires_grad(bank)) {
                                auto gb = t.grad(bank);
                                for (std::size_t i = 0; i < idx.size(); ++i)
                                  for (std::size_t j = 0; j < c; ++j) gb[idx[i] * c + j] += g[i * c + j];
                              }
                            });
}

}  // namespace gramformer::graphs
