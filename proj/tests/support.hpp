// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the unit tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gramformer/numerics/gradcheck.hpp"
#include "gramformer/numerics/ops.hpp"
#include "gramformer/numerics/tape.hpp"
#include "gramformer/numerics/tensor.hpp"

namespace gf_test {

using gramformer::Shape;
using gramformer::Tape;
using gramformer::Tensor;
using gramformer::Var;

inline Tensor random_tensor(Shape dims, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

/// Values with |v| in [lo, hi] and random sign; keeps inputs off kinks at 0.
inline Tensor away_from_zero(Shape dims, std::uint64_t seed, double lo = 0.2, double hi = 1.0) {
  Tensor t = random_tensor(std::move(dims), seed, lo, hi);
  std::mt19937_64 rng(seed + 1);
  for (auto& v : t.values()) v = (rng() & 1u) ? v : -v;
  return t;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Reduces the graph output with fixed random weights so that every output
/// entry contributes to the checked scalar, then finite-difference checks the
/// gradient of every input.
inline gramformer::GradCheckReport check_op(std::vector<Tensor>& inputs, const GraphFn& build,
                                            std::function<void(Tape&)> prepare = {}) {
  auto weights = std::make_shared<Tensor>();
  auto run = [&inputs, build, weights](Tape& tape) {
    std::vector<Var> vars;
    for (auto& t : inputs) vars.push_back(tape.parameter(t));
    Var out = build(tape, vars);
    if (weights->empty()) *weights = random_tensor(out.dims(), 991, 0.5, 1.5);
    return gramformer::ops::sum(gramformer::ops::mul(out, tape.constant(*weights)));
  };
  gramformer::GradCheckTarget target;
  target.evaluate = [run] {
    Tape tape;
    return run(tape).value()[0];
  };
  target.compute_gradients = [&inputs, run, prepare] {
    for (auto& t : inputs) t.zero_grad();
    Tape tape;
    if (prepare) prepare(tape);
    tape.backward(run(tape));
  };
  for (std::size_t i = 0; i < inputs.size(); ++i) target.params.push_back({"input" + std::to_string(i), &inputs[i]});
  return gramformer::grad_check(target);
}

// Loop oracles for the dense kernels. The convolution pads with zeros.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
  Tensor c({m, p});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a.at(i, t) * b.at(t, j);
      c.at(i, j) = s;
    }
  return c;
}

inline Tensor naive_conv(const Tensor& x, const Tensor& k, const Tensor& bias) {
  const std::size_t ci = x.dim(0), h = x.dim(1), w = x.dim(2), co = k.dim(0);
  Tensor out({co, h, w});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) {
        double s = bias[o];
        for (std::size_t c = 0; c < ci; ++c)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const long yy = static_cast<long>(y) + dy, xs = static_cast<long>(xx) + dx;
              if (yy < 0 || xs < 0 || yy >= static_cast<long>(h) || xs >= static_cast<long>(w)) continue;
              s += x.at(c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xs)) *
                   k[((o * ci + c) * 3 + static_cast<std::size_t>(dy + 1)) * 3 + static_cast<std::size_t>(dx + 1)];
            }
        out.at(o, y, xx) = s;
      }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gramformer_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace gf_test
