// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gramformer/numerics/tensor.hpp"

namespace gramformer::synthdata {

/// Binary 16-bit graymap. Samples are row-major, big-endian.
struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> samples;
  /// Physical value of one sample step, from a "# scale <s>" header comment.
  std::optional<double> scale;
};

std::vector<std::uint8_t> encode_pgm(const Pgm& pgm);
/// Throws ParseError naming the missing or malformed field.
Pgm decode_pgm(std::span<const std::uint8_t> bytes);

void write_pgm(const std::filesystem::path& path, const Pgm& pgm);
Pgm read_pgm(const std::filesystem::path& path);

/// Values in [0, 1] → round(v · 65535). Out-of-range values are clamped.
Pgm quantize_unit(const Tensor& map);
/// Nonnegative values stored as round(v / s) with s = max / 65535 recorded in
/// the header.
Pgm quantize_scaled(const Tensor& map);
/// Min-max stretch onto [0, 65535]; a constant map becomes all zeros.
Pgm quantize_minmax(const Tensor& map);

/// H×W tensor of sample · scale (scale defaults to 1/65535 when absent).
Tensor dequantize(const Pgm& pgm);

}  // namespace gramformer::synthdata
