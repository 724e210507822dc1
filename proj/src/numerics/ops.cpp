// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/kernels.hpp"

namespace gramformer::ops {

namespace {

void require_rank(const char* op, Var v, std::size_t rank) {
  if (v.value().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(v.dims()));
  }
}

void require_same(const char* op, Var a, Var b) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.dims()) + " vs " +
                     shape_string(b.dims()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const auto& ad = a.dims();
  const auto& bd = b.dims();
  if (ad[1] != bd[0]) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_string(ad) + " x " + shape_string(bd));
  }
  const kernels::MatmulDims d{ad[0], ad[1], bd[1]};
  Tensor out({d.m, d.p});
  kernels::parallel::matmul(a.value().values(), b.value().values(), out.values(), d);
  return a.tape->record("matmul", std::move(out), {a, b}, [a, b, d](Tape& t, std::span<const double> g) {
    if (t.requires_grad(a)) kernels::parallel::matmul_nt(g, t.value(b).values(), t.grad(a), {d.m, d.k, d.p});
    if (t.requires_grad(b)) kernels::parallel::matmul_tn(t.value(a).values(), g, t.grad(b), d);
  });
}

Var transpose(Var a) {
  require_rank("transpose", a, 2);
  const std::size_t r = a.dims()[0];
  const std::size_t c = a.dims()[1];
  const Tensor& av = a.value();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return a.tape->record("transpose", std::move(out), {a}, [a, r, c](Tape& t, std::span<const double> g) {
    auto ga = t.grad(a);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  });
}

Var add(Var a, Var b) {
  require_same("add", a, b);
  Tensor out = a.value();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->record("add", std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      auto gv = t.grad(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same("sub", a, b);
  Tensor out = a.value();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape->record("sub", std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    if (t.requires_grad(a)) {
      auto ga = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same("mul", a, b);
  Tensor out = a.value();
  const auto bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape->record("mul", std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    if (t.requires_grad(a)) {
      auto ga = t.grad(a);
      const auto bv = t.value(b).values();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad(b);
      const auto av = t.value(a).values();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= factor;
  return a.tape->record("scale", std::move(out), {a}, [a, factor](Tape& t, std::span<const double> g) {
    auto ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var add_row_bias(Var x, Var bias) {
  require_rank("add_row_bias", x, 2);
  const std::size_t n = x.dims()[0];
  const std::size_t c = x.dims()[1];
  if (bias.value().size() != c) {
    throw ShapeError("add_row_bias: bias " + shape_string(bias.dims()) + " does not match rows of " +
                     shape_string(x.dims()));
  }
  Tensor out = x.value();
  const auto bv = bias.value().values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bv[j];
  return x.tape->record("add_row_bias", std::move(out), {x, bias},
                        [x, bias, n, c](Tape& t, std::span<const double> g) {
                          if (t.requires_grad(x)) {
                            auto gx = t.grad(x);
                            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                          }
                          if (t.requires_grad(bias)) {
                            auto gb = t.grad(bias);
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
                          }
                        });
}

Var add_col_bias(Var x, Var bias) {
  require_rank("add_col_bias", x, 2);
  const std::size_t r = x.dims()[0];
  const std::size_t p = x.dims()[1];
  if (bias.value().size() != r) {
    throw ShapeError("add_col_bias: bias " + shape_string(bias.dims()) + " does not match columns of " +
                     shape_string(x.dims()));
  }
  Tensor out = x.value();
  const auto bv = bias.value().values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < p; ++j) out[i * p + j] += bv[i];
  return x.tape->record("add_col_bias", std::move(out), {x, bias},
                        [x, bias, r, p](Tape& t, std::span<const double> g) {
                          if (t.requires_grad(x)) {
                            auto gx = t.grad(x);
                            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                          }
                          if (t.requires_grad(bias)) {
                            auto gb = t.grad(bias);
                            for (std::size_t i = 0; i < r; ++i)
                              for (std::size_t j = 0; j < p; ++j) gb[i] += g[i * p + j];
                          }
                        });
}

Var relu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.dims());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return x.tape->record("relu", std::move(out), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    const auto xv = t.value(x).values();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

Var sigmoid(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.dims());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    // Split by sign so exp never overflows.
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  const std::size_t out_id = x.tape->size();
  return x.tape->record("sigmoid", std::move(out), {x}, [x, out_id](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    const auto yv = t.value(Var{&t, out_id}).values();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var abs(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.dims());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::fabs(xv[i]);
  return x.tape->record("abs", std::move(out), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    const auto xv = t.value(x).values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
      else if (xv[i] < 0.0) gx[i] -= g[i];
    }
  });
}

Var softmax_rows(Var x) {
  require_rank("softmax_rows", x, 2);
  const std::size_t r = x.dims()[0];
  const std::size_t c = x.dims()[1];
  const Tensor& xv = x.value();
  Tensor out(xv.dims());
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = &xv.storage()[i * c];
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - mx);
      total += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  const std::size_t out_id = x.tape->size();
  return x.tape->record("softmax_rows", std::move(out), {x}, [x, out_id, r, c](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    const auto y = t.value(Var{&t, out_id}).values();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_rank("layer_norm", x, 2);
  const std::size_t n = x.dims()[0];
  const std::size_t c = x.dims()[1];
  if (gain.value().size() != c || bias.value().size() != c) {
    throw ShapeError("layer_norm: gain/bias must have " + std::to_string(c) + " entries");
  }
  if (!(eps > 0.0)) throw ContractError("layer_norm: eps must be positive");
  const Tensor& xv = x.value();
  const auto gv = gain.value().values();
  const auto bv = bias.value().values();
  // Normalized rows and inverse std are kept for the backward pass.
  std::vector<double> xhat(n * c);
  std::vector<double> inv_std(n);
  Tensor out(xv.dims());
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += xv[i * c + j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = xv[i * c + j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv[i * c + j] - mu) * inv_std[i];
      out[i * c + j] = gv[j] * xhat[i * c + j] + bv[j];
    }
  }
  return x.tape->record(
      "layer_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, n, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t,
                                                                                 std::span<const double> g) {
        if (t.requires_grad(gain) || t.requires_grad(bias)) {
          auto gg = t.requires_grad(gain) ? t.grad(gain) : std::span<double>{};
          auto gb = t.requires_grad(bias) ? t.grad(bias) : std::span<double>{};
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) {
              if (!gg.empty()) gg[j] += g[i * c + j] * xhat[i * c + j];
              if (!gb.empty()) gb[j] += g[i * c + j];
            }
        }
        if (!t.requires_grad(x)) return;
        auto gx = t.grad(x);
        const auto gv = t.value(gain).values();
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t i = 0; i < n; ++i) {
          double mean_d = 0.0;
          double mean_dx = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double d = g[i * c + j] * gv[j];
            mean_d += d;
            mean_dx += d * xhat[i * c + j];
          }
          mean_d *= inv_c;
          mean_dx *= inv_c;
          for (std::size_t j = 0; j < c; ++j) {
            const double d = g[i * c + j] * gv[j];
            gx[i * c + j] += inv_std[i] * (d - mean_d - xhat[i * c + j] * mean_dx);
          }
        }
      });
}

Var conv2d_3x3(Var x, Var kernel, Var bias) {
  require_rank("conv2d_3x3", x, 3);
  require_rank("conv2d_3x3", kernel, 4);
  const auto& xd = x.dims();
  const auto& kd = kernel.dims();
  if (kd[1] != xd[0] || kd[2] != 3 || kd[3] != 3) {
    throw ShapeError("conv2d_3x3: kernel " + shape_string(kd) + " does not fit input " + shape_string(xd));
  }
  if (bias.value().size() != kd[0]) {
    throw ShapeError("conv2d_3x3: bias " + shape_string(bias.dims()) + " for " + std::to_string(kd[0]) +
                     " output channels");
  }
  const kernels::ConvDims d{xd[0], kd[0], xd[1], xd[2]};
  const std::size_t hw = d.height * d.width;
  Tensor out({d.out_channels, d.height, d.width});
  const auto bv = bias.value().values();
  for (std::size_t co = 0; co < d.out_channels; ++co)
    std::fill_n(out.storage().begin() + static_cast<std::ptrdiff_t>(co * hw), hw, bv[co]);
  kernels::parallel::conv3x3(x.value().values(), kernel.value().values(), out.values(), d);
  return x.tape->record("conv2d_3x3", std::move(out), {x, kernel, bias},
                        [x, kernel, bias, d, hw](Tape& t, std::span<const double> g) {
                          if (t.requires_grad(x))
                            kernels::parallel::conv3x3_grad_input(g, t.value(kernel).values(), t.grad(x), d);
                          if (t.requires_grad(kernel))
                            kernels::parallel::conv3x3_grad_kernel(g, t.value(x).values(), t.grad(kernel), d);
                          if (t.requires_grad(bias)) {
                            auto gb = t.grad(bias);
                            for (std::size_t co = 0; co < d.out_channels; ++co)
                              for (std::size_t i = 0; i < hw; ++i) gb[co] += g[co * hw + i];
                          }
                        });
}

Var conv2d_1x1(Var x, Var kernel, Var bias) {
  require_rank("conv2d_1x1", x, 3);
  require_rank("conv2d_1x1", kernel, 2);
  const auto xd = x.dims();
  if (kernel.dims()[1] != xd[0]) {
    throw ShapeError("conv2d_1x1: kernel " + shape_string(kernel.dims()) + " does not fit input " +
                     shape_string(xd));
  }
  Var flat = reshape(x, {xd[0], xd[1] * xd[2]});
  Var y = add_col_bias(matmul(kernel, flat), bias);
  return reshape(y, {kernel.dims()[0], xd[1], xd[2]});
}

Var upsample2x(Var x) {
  require_rank("upsample2x", x, 3);
  const std::size_t c = x.dims()[0];
  const std::size_t h = x.dims()[1];
  const std::size_t w = x.dims()[2];
  const Tensor& xv = x.value();
  Tensor out({c, 2 * h, 2 * w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx) out.at(ch, y, xx) = xv.at(ch, y / 2, xx / 2);
  return x.tape->record("upsample2x", std::move(out), {x}, [x, c, h, w](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    const std::size_t w2 = 2 * w;
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < 2 * h; ++y)
        for (std::size_t xx = 0; xx < w2; ++xx)
          gx[(ch * h + y / 2) * w + xx / 2] += g[(ch * 2 * h + y) * w2 + xx];
  });
}

Var reshape(Var x, Shape dims) {
  Tensor out = x.value().reshaped(std::move(dims));
  return x.tape->record("reshape", std::move(out), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t rows = parts[0].dims().at(0);
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (Var p : parts) {
    require_rank("concat_cols", p, 2);
    if (p.dims()[0] != rows) {
      throw ShapeError("concat_cols: row count mismatch " + shape_string(parts[0].dims()) + " vs " +
                       shape_string(p.dims()));
    }
    offsets.push_back(total);
    total += p.dims()[1];
  }
  Tensor out({rows, total});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    const std::size_t pc = pv.dim(1);
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(pv.storage().begin() + static_cast<std::ptrdiff_t>(i * pc), pc,
                  out.storage().begin() + static_cast<std::ptrdiff_t>(i * total + offsets[k]));
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape->record(
      "concat_cols", std::move(out), parts,
      [inputs, offsets, rows, total](Tape& t, std::span<const double> g) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (!t.requires_grad(inputs[k])) continue;
          auto gp = t.grad(inputs[k]);
          const std::size_t pc = t.value(inputs[k]).dim(1);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < pc; ++j) gp[i * pc + j] += g[i * total + offsets[k] + j];
        }
      });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  require_rank("gather_rows", x, 2);
  const std::size_t n = x.dims()[0];
  const std::size_t c = x.dims()[1];
  if (rows.empty()) throw ContractError("gather_rows: empty index list");
  for (auto r : rows) {
    if (r >= n) throw ContractError("gather_rows: row " + std::to_string(r) + " out of range for " + shape_string(x.dims()));
  }
  const Tensor& xv = x.value();
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(xv.storage().begin() + static_cast<std::ptrdiff_t>(rows[i] * c), c,
                out.storage().begin() + static_cast<std::ptrdiff_t>(i * c));
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape->record("gather_rows", std::move(out), {x}, [x, idx = std::move(idx), c](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) gx[idx[i] * c + j] += g[i * c + j];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape->record("sum", Tensor::scalar(total), {x}, [x](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    for (auto& v : gx) v += g[0];
  });
}

Var mean(Var x) {
  const double inv = 1.0 / static_cast<double>(x.value().size());
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape->record("mean", Tensor::scalar(total * inv), {x}, [x, inv](Tape& t, std::span<const double> g) {
    auto gx = t.grad(x);
    for (auto& v : gx) v += g[0] * inv;
  });
}

Var nodes_to_grid(Var nodes, std::size_t height, std::size_t width) {
  require_rank("nodes_to_grid", nodes, 2);
  if (nodes.dims()[0] != height * width) {
    throw ShapeError("nodes_to_grid: " + shape_string(nodes.dims()) + " nodes do not tile a " +
                     std::to_string(height) + "x" + std::to_string(width) + " grid");
  }
  const std::size_t c = nodes.dims()[1];
  return reshape(transpose(nodes), {c, height, width});
}

Var grid_to_nodes(Var grid) {
  require_rank("grid_to_nodes", grid, 3);
  const auto d = grid.dims();
  return transpose(reshape(grid, {d[0], d[1] * d[2]}));
}

}  // namespace gramformer::ops
