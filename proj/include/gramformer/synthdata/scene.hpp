// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gramformer/numerics/tensor.hpp"

namespace gramformer::synthdata {

/// Head centre in continuous pixel coordinates; pixel (row r, col c) covers
/// [c, c+1) × [r, r+1).
struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct SceneSample {
  Tensor image;    // H×W, values in [0, 1]
  std::vector<Point> points;
  Tensor density;  // H×W, nonnegative
  std::size_t count() const noexcept { return points.size(); }
};

/// Scene geometry. The image is split into equal-height horizontal bands,
/// top to bottom; band b receives Poisson(expected[b] · s) heads where s is
/// a per-scene scale drawn uniformly from [count_scale_min, count_scale_max].
/// A head at height y is a disc of radius r0 + gain · y.
struct SceneSpec {
  std::size_t width = 64;
  std::size_t height = 64;
  std::vector<double> band_expected = {16.0, 12.0, 8.0, 6.0};
  double r0 = 1.2;
  double gain = 0.06;
  double count_scale_min = 0.5;
  double count_scale_max = 1.5;
  double margin = 4.0;            // heads keep this far from the left/right/top/bottom edge
  double head_intensity = 0.8;
  double intensity_jitter = 0.15;
  double background = 0.1;
  double clutter_expected = 3.0;  // Poisson mean of distractor discs
  double clutter_intensity = 0.35;
  double density_sigma = 2.0;

  /// Throws ContractError naming the first violated constraint.
  void validate() const;
  double radius_at(double y) const noexcept { return r0 + gain * y; }
  double band_height() const noexcept;

  bool operator==(const SceneSpec&) const = default;
};

SceneSample generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// Seed of scene `index` in a dataset generated from `seed`.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);
std::vector<SceneSample> generate_scenes(const SceneSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace gramformer::synthdata
