// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/config.hpp"

#include "gramformer/numerics/errors.hpp"

namespace gramformer::model {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::gramformer: return "gramformer";
    case Variant::vanilla: return "vanilla";
    case Variant::graphormer: return "graphormer";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "gramformer") return Variant::gramformer;
  if (name == "vanilla") return Variant::vanilla;
  if (name == "graphormer") return Variant::graphormer;
  throw ContractError("unknown variant '" + std::string(name) + "' (expected gramformer, vanilla or graphormer)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("model config: " + msg); };
  if (channels < 4 || channels % 4 != 0) fail("channels must be a positive multiple of 4");
  if (heads < 1 || channels % heads != 0) fail("channels must be divisible by heads");
  if (layers < 1) fail("layers must be at least 1");
  if (!(q > 0.0 && q <= 1.0)) fail("q must lie in (0, 1]");
  if (m < 1) fail("m must be at least 1");
  if (!(lambda >= 0.0)) fail("lambda must be non-negative");
  if (patch < 2 || patch % 2 != 0) fail("patch must be an even number of pixels");
  if (!(density_sigma > 0.0)) fail("density sigma must be positive");
  if (!(ln_eps > 0.0)) fail("layer-norm eps must be positive");
}

}  // namespace gramformer::model
