// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/synthdata/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::synthdata {

Tensor rasterize_density(std::span<const Point> points, std::size_t height, std::size_t width, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("rasterize_density: sigma must be positive");
  if (height == 0 || width == 0) throw ContractError("rasterize_density: empty output shape");
  Tensor out({height, width});
  const double cutoff = 4.0 * sigma;
  const double cutoff2 = cutoff * cutoff;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double norm = inv_two_var / std::numbers::pi;
  const auto h = static_cast<long>(height);
  const auto w = static_cast<long>(width);
  for (const Point& p : points) {
    const long y0 = std::max(0L, static_cast<long>(std::floor(p.y - cutoff)));
    const long y1 = std::min(h - 1, static_cast<long>(std::ceil(p.y + cutoff)));
    const long x0 = std::max(0L, static_cast<long>(std::floor(p.x - cutoff)));
    const long x1 = std::min(w - 1, static_cast<long>(std::ceil(p.x + cutoff)));
    for (long y = y0; y <= y1; ++y) {
      const double dy = static_cast<double>(y) + 0.5 - p.y;
      for (long x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - p.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 > cutoff2) continue;
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) += norm * std::exp(-d2 * inv_two_var);
      }
    }
  }
  return out;
}

}  // namespace gramformer::synthdata
