// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "gramformer/numerics/tensor.hpp"
#include "gramformer/synthdata/scene.hpp"

namespace gramformer::synthdata {

/// Sum of unit-mass isotropic Gaussians sampled at pixel centres, each cut off
/// beyond 4σ. Returns a height×width map.
Tensor rasterize_density(std::span<const Point> points, std::size_t height, std::size_t width, double sigma);

}  // namespace gramformer::synthdata
