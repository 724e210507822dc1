// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/model.hpp"

#include <string>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::model {

BoundParameters bind_parameters(Tape& tape, ParameterStore& store, const ModelConfig& config) {
  auto bind = [&](const std::string& name) { return tape.parameter(store.get(name)); };
  BoundParameters b;
  b.encoder_weight = bind("encoder.weight");
  b.encoder_bias = bind("encoder.bias");
  if (config.ewr_active()) {
    for (std::size_t s = 0; s < config.heads; ++s) {
      const std::string p = "ewr." + std::to_string(s) + ".";
      b.ewr.push_back({bind(p + "conv1.weight"), bind(p + "conv1.bias"), bind(p + "conv2.weight"),
                       bind(p + "conv2.bias")});
    }
  }
  if (config.centrality_active()) b.bank = bind("centrality.bank");
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    AttentionParams attn;
    for (std::size_t s = 0; s < config.heads; ++s) {
      attn.query.push_back(bind(p + "attn.query." + std::to_string(s)));
      attn.key.push_back(bind(p + "attn.key." + std::to_string(s)));
      attn.value.push_back(bind(p + "attn.value." + std::to_string(s)));
    }
    attn.out = bind(p + "attn.out");
    attn.norm_gain = bind(p + "norm1.gain");
    attn.norm_bias = bind(p + "norm1.bias");
    b.attention.push_back(std::move(attn));
    b.ffn.push_back({bind(p + "ffn.fc1.weight"), bind(p + "ffn.fc1.bias"), bind(p + "ffn.fc2.weight"),
                     bind(p + "ffn.fc2.bias"), bind(p + "norm2.gain"), bind(p + "norm2.bias")});
    if (config.edge_bias_active()) {
      b.edge_mlp.push_back({bind(p + "edge_mlp.fc1.weight"), bind(p + "edge_mlp.fc1.bias"),
                            bind(p + "edge_mlp.fc2.weight"), bind(p + "edge_mlp.fc2.bias")});
    }
  }
  b.head = {bind("head.conv1.weight"), bind("head.conv1.bias"), bind("head.conv2.weight"),
            bind("head.conv2.bias"),   bind("head.conv3.weight"), bind("head.conv3.bias")};
  return b;
}

TransformerOutput transformer_forward(Var initial_nodes, GridShape grid, const BoundParameters& params,
                                      const ModelConfig& config, const ForwardOptions& options) {
  if (options.frozen_neighbors != nullptr && options.frozen_neighbors->size() != config.layers) {
    throw ContractError("transformer_forward: frozen neighbour sets must cover every layer");
  }
  TransformerOutput out;
  out.trace.grid = grid;

  std::optional<graphs::AttentionGraph> graph;
  if (config.ewr_active()) {
    const auto field = graphs::ewr_forward(initial_nodes, grid, params.ewr);
    graph = graphs::build_attention_graph(field);
    out.regularization = graphs::edge_regularization(field);
    if (options.keep_trace) {
      for (Var f : field.heads) out.trace.semantic_field.push_back(f.value());
      for (Var e : graph->edges) out.trace.attention_graph.push_back(e.value());
    }
  }

  const bool needs_neighbors = config.centrality_active() || config.edge_bias_active() || options.keep_trace;
  Var nodes = initial_nodes;
  for (std::size_t l = 0; l < config.layers; ++l) {
    graphs::NeighborSets neighbors;
    if (options.frozen_neighbors != nullptr) {
      neighbors = (*options.frozen_neighbors)[l];
    } else if (needs_neighbors) {
      neighbors = graphs::knn_neighbors(nodes.value(), config.q);
    }

    AttentionContext ctx;
    ctx.ln_eps = config.ln_eps;
    if (graph) ctx.graph = &*graph;
    graphs::CentralityState centrality;
    if (config.centrality_active()) {
      centrality = graphs::centrality_indices(neighbors, config.m);
      ctx.centrality_index = centrality.index;
      ctx.bank = params.bank;
    }
    if (config.edge_bias_active()) ctx.logit_bias = edge_bias(nodes, neighbors, params.edge_mlp[l]);

    if (options.keep_trace) {
      out.trace.layer_inputs.push_back(nodes.value());
      out.trace.centrality_index.push_back(centrality.index);
    }
    AttentionOutput attn = attention_layer(nodes, params.attention[l], ctx);
    if (options.keep_trace) {
      std::vector<Tensor> maps;
      for (Var a : attn.attention) maps.push_back(a.value());
      out.trace.attention.push_back(std::move(maps));
      out.trace.neighbors.push_back(neighbors);
    }
    out.neighbors.push_back(std::move(neighbors));
    nodes = feed_forward(attn.nodes, params.ffn[l], config.ln_eps);
  }
  out.nodes = nodes;
  return out;
}

GramformerModel::GramformerModel(ModelConfig config, ParameterStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
}

GramformerModel GramformerModel::create(const ModelConfig& config, std::uint64_t seed) {
  return GramformerModel(config, init_parameters(config, seed));
}

ForwardResult GramformerModel::forward(Tape& tape, const Tensor& image, const ForwardOptions& options) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw ShapeError("forward: expected a 1×H×W image, got " + shape_string(image.dims()));
  }
  const BoundParameters bound = bind_parameters(tape, params_, config_);
  const EncodedNodes encoded = patch_encode(tape.constant(image), config_.patch, bound.encoder_weight, bound.encoder_bias);
  if (encoded.grid.nodes() < 2) throw ContractError("forward: image yields fewer than 2 nodes");

  TransformerOutput tf = transformer_forward(encoded.nodes, encoded.grid, bound, config_, options);
  ForwardResult result;
  result.density = regression_head(tf.nodes, encoded.grid, bound.head);
  result.regularization = tf.regularization;
  result.trace = std::move(tf.trace);
  result.neighbors = std::move(tf.neighbors);
  if (options.keep_trace) result.trace.density = result.density.value();
  return result;
}

}  // namespace gramformer::model
