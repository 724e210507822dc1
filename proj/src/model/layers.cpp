// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/layers.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/ops.hpp"

namespace gramformer::model {

namespace {

Var extract_patches(Var image, std::size_t patch) {
  const auto& d = image.dims();
  if (d.size() != 3) throw ShapeError("patch_encode: expected C×H×W image, got " + shape_string(d));
  const std::size_t ch = d[0];
  const std::size_t h = d[1];
  const std::size_t w = d[2];
  if (patch == 0 || h % patch != 0 || w % patch != 0) {
    throw ContractError("patch_encode: image " + std::to_string(h) + "x" + std::to_string(w) +
                        " is not divisible by patch " + std::to_string(patch));
  }
  const std::size_t gh = h / patch;
  const std::size_t gw = w / patch;
  const std::size_t feat = ch * patch * patch;
  // Column index of pixel (c, py, px) inside a patch row, and its source offset.
  std::vector<std::size_t> source(gh * gw * feat);
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx)
      for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t py = 0; py < patch; ++py)
          for (std::size_t px = 0; px < patch; ++px) {
            const std::size_t node = gy * gw + gx;
            const std::size_t col = (c * patch + py) * patch + px;
            source[node * feat + col] = (c * h + gy * patch + py) * w + gx * patch + px;
          }
  const Tensor& iv = image.value();
  Tensor out({gh * gw, feat});
  for (std::size_t i = 0; i < source.size(); ++i) out[i] = iv[source[i]];
  return image.tape->record("extract_patches", std::move(out), {image},
                            [image, source = std::move(source)](Tape& t, std::span<const double> g) {
                              auto gi = t.grad(image);
                              for (std::size_t i = 0; i < source.size(); ++i) gi[source[i]] += g[i];
                            });
}

// Writes the per-pair values of an M×1 column into an N×N matrix, zero elsewhere.
Var scatter_pairs(Var values, std::vector<std::size_t> flat_index, std::size_t n) {
  const auto v = values.value().values();
  Tensor out({n, n});
  for (std::size_t p = 0; p < flat_index.size(); ++p) out[flat_index[p]] += v[p];
  return values.tape->record("scatter_pairs", std::move(out), {values},
                             [values, flat_index = std::move(flat_index)](Tape& t, std::span<const double> g) {
                               auto gv = t.grad(values);
                               for (std::size_t p = 0; p < flat_index.size(); ++p) gv[p] += g[flat_index[p]];
                             });
}

}  // namespace

EncodedNodes patch_encode(Var image, std::size_t patch, Var weight, Var bias) {
  Var patches = extract_patches(image, patch);
  const auto& d = image.dims();
  EncodedNodes out;
  out.grid = GridShape{d[1] / patch, d[2] / patch};
  out.nodes = ops::relu(ops::add_row_bias(ops::matmul(patches, weight), bias));
  return out;
}

AttentionOutput attention_layer(Var nodes, const AttentionParams& params, const AttentionContext& context) {
  if (nodes.value().rank() != 2) throw ShapeError("attention_layer: expected N×C nodes, got " + shape_string(nodes.dims()));
  const std::size_t heads = params.query.size();
  if (heads == 0 || params.key.size() != heads || params.value.size() != heads) {
    throw ContractError("attention_layer: query/key/value head counts disagree");
  }
  if (context.graph != nullptr && context.graph->head_count() != heads) {
    throw ShapeError("attention_layer: attention graph has " + std::to_string(context.graph->head_count()) +
                     " heads, layer has " + std::to_string(heads));
  }
  const std::size_t c = nodes.dims()[1];
  const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(c));

  Var modulated = nodes;
  if (!context.centrality_index.empty()) {
    modulated = graphs::centrality_embed(nodes, context.centrality_index, context.bank);
  }

  AttentionOutput out;
  std::vector<Var> head_out;
  for (std::size_t s = 0; s < heads; ++s) {
    Var q = ops::matmul(modulated, params.query[s]);
    Var k = ops::matmul(modulated, params.key[s]);
    Var logits = ops::scale(ops::matmul(q, ops::transpose(k)), inv_sqrt_c);
    if (context.logit_bias) logits = ops::add(logits, *context.logit_bias);
    Var attn = ops::softmax_rows(logits);
    if (context.graph != nullptr) attn = ops::mul(context.graph->edges[s], attn);
    out.attention.push_back(attn);
    head_out.push_back(ops::matmul(attn, ops::matmul(nodes, params.value[s])));
  }
  Var mixed = ops::matmul(ops::concat_cols(head_out), params.out);
  out.nodes = ops::layer_norm(ops::add(nodes, mixed), params.norm_gain, params.norm_bias, context.ln_eps);
  return out;
}

Var feed_forward(Var nodes, const FeedForwardParams& p, double ln_eps) {
  Var hidden = ops::relu(ops::add_row_bias(ops::matmul(nodes, p.fc1_weight), p.fc1_bias));
  Var y = ops::add_row_bias(ops::matmul(hidden, p.fc2_weight), p.fc2_bias);
  return ops::layer_norm(ops::add(nodes, y), p.norm_gain, p.norm_bias, ln_eps);
}

Var edge_bias(Var nodes, const graphs::NeighborSets& neighbors, const EdgeMlpParams& p) {
  const std::size_t n = nodes.dims().at(0);
  const std::size_t c = nodes.dims().at(1);
  if (neighbors.size() != n) throw ContractError("edge_bias: one neighbour set per node required");
  if (p.fc1_weight.dims() != Shape{2 * c, c}) {
    throw ShapeError("edge_bias: fc1 weight " + shape_string(p.fc1_weight.dims()) + " for " + std::to_string(c) +
                     " channels");
  }
  // [v_i, v_j] W1 = v_i W1[0:C] + v_j W1[C:2C]; project every node once, then
  // gather per edge.
  std::vector<std::size_t> top(c), bottom(c);
  std::iota(top.begin(), top.end(), std::size_t{0});
  std::iota(bottom.begin(), bottom.end(), c);
  Var src_proj = ops::matmul(nodes, ops::gather_rows(p.fc1_weight, top));
  Var dst_proj = ops::matmul(nodes, ops::gather_rows(p.fc1_weight, bottom));

  std::vector<std::size_t> src, dst, flat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : neighbors[i]) {
      src.push_back(i);
      dst.push_back(j);
      flat.push_back(i * n + j);
    }
  if (src.empty()) return nodes.tape->constant(Tensor({n, n}));
  Var hidden = ops::relu(ops::add_row_bias(ops::add(ops::gather_rows(src_proj, src), ops::gather_rows(dst_proj, dst)),
                                           p.fc1_bias));
  Var weight = ops::add_row_bias(ops::matmul(hidden, p.fc2_weight), p.fc2_bias);
  return scatter_pairs(weight, std::move(flat), n);
}

Var regression_head(Var nodes, GridShape grid, const HeadParams& p) {
  Var map = ops::upsample2x(ops::nodes_to_grid(nodes, grid.height, grid.width));
  Var h1 = ops::relu(ops::conv2d_3x3(map, p.conv1_weight, p.conv1_bias));
  Var h2 = ops::relu(ops::conv2d_3x3(h1, p.conv2_weight, p.conv2_bias));
  return ops::relu(ops::conv2d_1x1(h2, p.conv3_weight, p.conv3_bias));
}

}  // namespace gramformer::model
