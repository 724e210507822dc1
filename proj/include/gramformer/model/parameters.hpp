// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gramformer/model/config.hpp"
#include "gramformer/numerics/gradcheck.hpp"
#include "gramformer/numerics/tensor.hpp"

namespace gramformer::model {

/// Named parameter tensors in a fixed order. Names are dotted paths such as
/// "layer.1.attn.query.0".
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  Tensor& add(std::string name, Tensor tensor);
  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<Entry>& entries() noexcept { return entries_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::vector<Tensor*> tensors();
  std::vector<NamedTensor> named();
  std::size_t scalar_count() const;
  void zero_grad();

  bool operator==(const ParameterStore& other) const;

 private:
  std::vector<Entry> entries_;
};

/// Creates every tensor the configuration needs. Each tensor draws from its
/// own stream seeded by (seed, name), so a tensor's initial value does not
/// depend on which other tensors exist: two variants that share a tensor
/// name start from identical values.
ParameterStore init_parameters(const ModelConfig& config, std::uint64_t seed);

/// Adds uniform(−amplitude, amplitude) noise to every entry, one stream per
/// tensor. Moves a freshly initialised model off the ReLU kinks that zero
/// biases put it on.
void perturb_parameters(ParameterStore& store, double amplitude, std::uint64_t seed);

}  // namespace gramformer::model
