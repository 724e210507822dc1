// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "gramformer/model/parameters.hpp"

namespace gramformer::model {

// Binary layout, all integers little-endian:
//   "GRMF"  u16 version (= 1)  u32 tensor_count
//   per tensor: u16 name_len, name (UTF-8), u8 rank, u32 dims[rank],
//               f64 payload[product(dims)] (IEEE-754, little-endian)

inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore& params);
/// Parses a byte stream into named tensors without checking them against a model.
ParameterStore decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Replaces every tensor in `params` with the checkpoint's values. The target
/// is left untouched unless the checkpoint names exactly the same tensors with
/// the same shapes.
void load_parameters(std::span<const std::uint8_t> bytes, ParameterStore& params);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params);
void load_checkpoint(const std::filesystem::path& path, ParameterStore& params);

}  // namespace gramformer::model
