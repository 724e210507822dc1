// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/graphs/attention_graph.hpp"

#include <cmath>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/ops.hpp"

namespace gramformer::graphs {

SemanticField ewr_forward(Var nodes, GridShape grid, std::span<const EwrHeadParams> heads) {
  if (nodes.value().rank() != 2 || nodes.dims()[0] != grid.nodes()) {
    throw ShapeError("ewr_forward: node features " + shape_string(nodes.dims()) + " do not tile a " +
                     std::to_string(grid.height) + "x" + std::to_string(grid.width) + " grid");
  }
  SemanticField field;
  field.grid = grid;
  Var map = ops::nodes_to_grid(nodes, grid.height, grid.width);
  for (const auto& head : heads) {
    Var hidden = ops::relu(ops::conv2d_3x3(map, head.conv1_weight, head.conv1_bias));
    Var out = ops::sigmoid(ops::conv2d_3x3(hidden, head.conv2_weight, head.conv2_bias));
    if (out.dims()[0] != 1) throw ShapeError("ewr_forward: regressor must end in one channel");
    field.heads.push_back(ops::reshape(out, {grid.nodes()}));
  }
  return field;
}

namespace {

Var pairwise_abs_diff(Var f) {
  const std::size_t n = f.value().size();
  const auto fv = f.value().values();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = std::fabs(fv[i] - fv[j]);
  return f.tape->record("pairwise_abs_diff", std::move(out), {f}, [f, n](Tape& t, std::span<const double> g) {
    auto gf = t.grad(f);
    const auto fv = t.value(f).values();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = fv[i] - fv[j];
        if (d == 0.0) continue;
        const double s = d > 0.0 ? g[i * n + j] : -g[i * n + j];
        gf[i] += s;
        gf[j] -= s;
      }
  });
}

}  // namespace

AttentionGraph build_attention_graph(const SemanticField& field) {
  AttentionGraph graph;
  for (Var f : field.heads) graph.edges.push_back(pairwise_abs_diff(f));
  return graph;
}

Var edge_regularization(const SemanticField& field) {
  if (field.heads.empty()) throw ContractError("edge_regularization: field has no heads");
  const GridShape grid = field.grid;
  const std::size_t n = grid.nodes();
  const double norm = 1.0 / static_cast<double>(field.heads.size() * n);

  // Deviations from the row mean, kept for the backward pass.
  std::vector<std::vector<double>> deviations;
  double total = 0.0;
  for (Var f : field.heads) {
    const auto fv = f.value().values();
    if (fv.size() != n) throw ShapeError("edge_regularization: head size does not match grid");
    std::vector<double> dev(n);
    for (std::size_t row = 0; row < grid.height; ++row) {
      double mu = 0.0;
      for (std::size_t c = 0; c < grid.width; ++c) mu += fv[row * grid.width + c];
      mu /= static_cast<double>(grid.width);
      for (std::size_t c = 0; c < grid.width; ++c) {
        const std::size_t i = row * grid.width + c;
        dev[i] = fv[i] - mu;
        total += dev[i] * dev[i];
      }
    }
    deviations.push_back(std::move(dev));
  }
  std::vector<Var> inputs = field.heads;
  Tape& tape = *field.heads.front().tape;
  // d/df_i of Σ_row Σ_j (f_j − mean)² is 2(f_i − mean); the mean's own
  // derivative contributions cancel because deviations sum to zero per row.
  return tape.record("edge_regularization", Tensor::scalar(total * norm), inputs,
                     [inputs, deviations = std::move(deviations), norm](Tape& t, std::span<const double> g) {
                       for (std::size_t s = 0; s < inputs.size(); ++s) {
                         if (!t.requires_grad(inputs[s])) continue;
                         auto gf = t.grad(inputs[s]);
                         for (std::size_t i = 0; i < gf.size(); ++i) gf[i] += g[0] * 2.0 * norm * deviations[s][i];
                       }
                     });
}

}  // namespace gramformer::graphs
