// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/synthdata/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/synthdata/density.hpp"

namespace gramformer::synthdata {

namespace {

// Knuth's multiplication method stops being accurate once e^-λ underflows.
constexpr double kMaxPoissonMean = 500.0;
constexpr int kSupersample = 4;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Own sampler rather than std::poisson_distribution so that datasets are
// identical across standard library implementations.
std::size_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double p = uniform01(rng);
  while (p > limit) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Composites a disc over the image with per-pixel coverage from a regular
// kSupersample² grid of subpixel samples.
void draw_disc(Tensor& image, double cx, double cy, double radius, double intensity) {
  const auto h = static_cast<long>(image.dim(0));
  const auto w = static_cast<long>(image.dim(1));
  const long y0 = std::max(0L, static_cast<long>(std::floor(cy - radius)));
  const long y1 = std::min(h - 1, static_cast<long>(std::floor(cy + radius)));
  const long x0 = std::max(0L, static_cast<long>(std::floor(cx - radius)));
  const long x1 = std::min(w - 1, static_cast<long>(std::floor(cx + radius)));
  const double r2 = radius * radius;
  constexpr double step = 1.0 / kSupersample;
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      int inside = 0;
      for (int sy = 0; sy < kSupersample; ++sy) {
        const double py = static_cast<double>(y) + (sy + 0.5) * step - cy;
        for (int sx = 0; sx < kSupersample; ++sx) {
          const double px = static_cast<double>(x) + (sx + 0.5) * step - cx;
          if (px * px + py * py <= r2) ++inside;
        }
      }
      if (inside == 0) continue;
      const double cover = static_cast<double>(inside) / (kSupersample * kSupersample);
      double& v = image.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
      v = v * (1.0 - cover) + intensity * cover;
    }
  }
}

}  // namespace

double SceneSpec::band_height() const noexcept {
  return static_cast<double>(height) / static_cast<double>(band_expected.size());
}

void SceneSpec::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("scene spec: " + what); };
  if (width == 0 || height == 0) fail("image size must be positive");
  if (band_expected.empty()) fail("at least one band is required");
  for (double e : band_expected) {
    if (!(e >= 0.0)) fail("band expectations must be nonnegative");
    if (e * count_scale_max > kMaxPoissonMean) fail("band expectation too large");
  }
  if (!(r0 > 0.0) || !(radius_at(static_cast<double>(height)) > 0.0)) fail("head radius must be positive everywhere");
  if (!(count_scale_min >= 0.0) || !(count_scale_max >= count_scale_min)) fail("count scale range is invalid");
  if (!(margin >= 0.0) || 2.0 * margin >= static_cast<double>(std::min(width, height))) fail("margin too large");
  // Every band must intersect the placement area; the top and bottom bands
  // lose `margin` rows each.
  if (margin >= band_height()) fail("margin hides the top or bottom band");
  for (double v : {head_intensity, clutter_intensity, background}) {
    if (!(v >= 0.0 && v <= 1.0)) fail("intensities must lie in [0, 1]");
  }
  if (!(intensity_jitter >= 0.0)) fail("intensity jitter must be nonnegative");
  if (!(clutter_expected >= 0.0) || clutter_expected > kMaxPoissonMean) fail("clutter expectation out of range");
  if (!(density_sigma > 0.0)) fail("density sigma must be positive");
}

SceneSample generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  const double w = static_cast<double>(spec.width);
  const double h = static_cast<double>(spec.height);

  SceneSample scene;
  scene.image = Tensor({spec.height, spec.width}, spec.background);

  const double scale = uniform(rng, spec.count_scale_min, spec.count_scale_max);
  const double bh = spec.band_height();
  for (std::size_t b = 0; b < spec.band_expected.size(); ++b) {
    const std::size_t n = poisson(rng, spec.band_expected[b] * scale);
    const double lo = std::max(static_cast<double>(b) * bh, spec.margin);
    const double hi = std::min(static_cast<double>(b + 1) * bh, h - spec.margin);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = uniform(rng, spec.margin, w - spec.margin);
      const double y = uniform(rng, lo, hi);
      scene.points.push_back({x, y});
    }
  }
  std::vector<double> head_intensity(scene.points.size());
  for (double& v : head_intensity) {
    v = std::clamp(spec.head_intensity + uniform(rng, -spec.intensity_jitter, spec.intensity_jitter), 0.0, 1.0);
  }

  // Clutter sits behind the heads.
  const std::size_t clutter = poisson(rng, spec.clutter_expected);
  for (std::size_t i = 0; i < clutter; ++i) {
    const double x = uniform(rng, 0.0, w);
    const double y = uniform(rng, 0.0, h);
    const double r = uniform(rng, 1.0, 3.0);
    const double v = std::clamp(spec.clutter_intensity + uniform(rng, -0.5, 0.5) * spec.intensity_jitter, 0.0, 1.0);
    draw_disc(scene.image, x, y, r, v);
  }
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const auto& p = scene.points[i];
    draw_disc(scene.image, p.x, p.y, spec.radius_at(p.y), head_intensity[i]);
  }

  scene.density = rasterize_density(scene.points, spec.height, spec.width, spec.density_sigma);
  return scene;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index));
}

std::vector<SceneSample> generate_scenes(const SceneSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  std::vector<SceneSample> out(n);
#pragma omp parallel for schedule(dynamic) if (n > 8)
  for (std::size_t i = 0; i < n; ++i) out[i] = generate_scene(spec, scene_seed(seed, i));
  return out;
}

}  // namespace gramformer::synthdata
