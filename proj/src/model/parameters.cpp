// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/parameters.hpp"

#include <cmath>
#include <random>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::model {

Tensor& ParameterStore::add(std::string name, Tensor tensor) {
  if (contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

Tensor* ParameterStore::find(std::string_view name) {
  for (auto& e : entries_)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

const Tensor* ParameterStore::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

Tensor& ParameterStore::get(std::string_view name) {
  if (Tensor* t = find(name)) return *t;
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

const Tensor& ParameterStore::get(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

std::vector<Tensor*> ParameterStore::tensors() {
  std::vector<Tensor*> out;
  for (auto& e : entries_) out.push_back(&e.tensor);
  return out;
}

std::vector<NamedTensor> ParameterStore::named() {
  std::vector<NamedTensor> out;
  for (auto& e : entries_) out.push_back({e.name, &e.tensor});
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) {
    e.tensor.ensure_grad();
    e.tensor.zero_grad();
  }
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.tensor.dims() != b.tensor.dims() || a.tensor.storage() != b.tensor.storage())
      return false;
  }
  return true;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

enum class Init { glorot, zeros, ones };

struct Builder {
  ParameterStore& store;
  std::uint64_t seed;

  void operator()(const std::string& name, Shape dims, Init init, std::size_t fan_in = 0, std::size_t fan_out = 0) {
    Tensor t(std::move(dims), init == Init::ones ? 1.0 : 0.0);
    if (init == Init::glorot) {
      std::mt19937_64 rng(seed ^ fnv1a(name));
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : t.values()) v = dist(rng);
    }
    store.add(name, std::move(t));
  }
};

}  // namespace

void perturb_parameters(ParameterStore& store, double amplitude, std::uint64_t seed) {
  for (auto& e : store.entries()) {
    std::mt19937_64 rng(~seed ^ fnv1a(e.name));
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    for (auto& v : e.tensor.values()) v += dist(rng);
  }
}

ParameterStore init_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t c = config.channels;
  const std::size_t dh = c / config.heads;
  const std::size_t patch_inputs = config.patch * config.patch;
  ParameterStore store;
  Builder add{store, seed};

  add("encoder.weight", {patch_inputs, c}, Init::glorot, patch_inputs, c);
  add("encoder.bias", {c}, Init::zeros);

  if (config.ewr_active()) {
    for (std::size_t s = 0; s < config.heads; ++s) {
      const std::string p = "ewr." + std::to_string(s) + ".";
      add(p + "conv1.weight", {c / 2, c, 3, 3}, Init::glorot, c * 9, (c / 2) * 9);
      add(p + "conv1.bias", {c / 2}, Init::zeros);
      add(p + "conv2.weight", {1, c / 2, 3, 3}, Init::glorot, (c / 2) * 9, 9);
      add(p + "conv2.bias", {1}, Init::zeros);
    }
  }
  if (config.centrality_active()) add("centrality.bank", {config.m + 1, c}, Init::zeros);

  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    for (const char* proj : {"query", "key", "value"})
      for (std::size_t s = 0; s < config.heads; ++s)
        add(p + "attn." + proj + "." + std::to_string(s), {c, dh}, Init::glorot, c, dh);
    add(p + "attn.out", {c, c}, Init::glorot, c, c);
    add(p + "norm1.gain", {c}, Init::ones);
    add(p + "norm1.bias", {c}, Init::zeros);
    add(p + "ffn.fc1.weight", {c, 2 * c}, Init::glorot, c, 2 * c);
    add(p + "ffn.fc1.bias", {2 * c}, Init::zeros);
    add(p + "ffn.fc2.weight", {2 * c, c}, Init::glorot, 2 * c, c);
    add(p + "ffn.fc2.bias", {c}, Init::zeros);
    add(p + "norm2.gain", {c}, Init::ones);
    add(p + "norm2.bias", {c}, Init::zeros);
    if (config.edge_bias_active()) {
      add(p + "edge_mlp.fc1.weight", {2 * c, c}, Init::glorot, 2 * c, c);
      add(p + "edge_mlp.fc1.bias", {c}, Init::zeros);
      add(p + "edge_mlp.fc2.weight", {c, 1}, Init::glorot, c, 1);
      add(p + "edge_mlp.fc2.bias", {1}, Init::zeros);
    }
  }

  add("head.conv1.weight", {c / 2, c, 3, 3}, Init::glorot, c * 9, (c / 2) * 9);
  add("head.conv1.bias", {c / 2}, Init::zeros);
  add("head.conv2.weight", {c / 4, c / 2, 3, 3}, Init::glorot, (c / 2) * 9, (c / 4) * 9);
  add("head.conv2.bias", {c / 4}, Init::zeros);
  add("head.conv3.weight", {1, c / 4}, Init::glorot, c / 4, 1);
  add("head.conv3.bias", {1}, Init::zeros);
  return store;
}

}  // namespace gramformer::model
