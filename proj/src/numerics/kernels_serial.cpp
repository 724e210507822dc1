// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/kernels.hpp"

namespace gramformer::kernels::serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  for (std::size_t i = 0; i < d.m; ++i) {
    for (std::size_t j = 0; j < d.p; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d.k; ++t) acc += a[i * d.k + t] * b[t * d.p + j];
      c[i * d.p + j] += acc;
    }
  }
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  for (std::size_t i = 0; i < d.m; ++i) {
    for (std::size_t t = 0; t < d.k; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d.p; ++j) acc += a[i * d.p + j] * b[t * d.p + j];
      c[i * d.k + t] += acc;
    }
  }
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  for (std::size_t t = 0; t < d.k; ++t) {
    for (std::size_t j = 0; j < d.p; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d.m; ++i) acc += a[i * d.k + t] * b[i * d.p + j];
      c[t * d.p + j] += acc;
    }
  }
}

namespace {

bool inside(long y, long x, const ConvDims& d) {
  return y >= 0 && x >= 0 && y < static_cast<long>(d.height) && x < static_cast<long>(d.width);
}

}  // namespace

void conv3x3(std::span<const double> x, std::span<const double> k, std::span<double> out, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  for (std::size_t co = 0; co < d.out_channels; ++co)
    for (std::size_t y = 0; y < d.height; ++y)
      for (std::size_t xx = 0; xx < d.width; ++xx) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < d.in_channels; ++ci)
          for (long ky = 0; ky < 3; ++ky)
            for (long kx = 0; kx < 3; ++kx) {
              const long sy = static_cast<long>(y) + ky - 1;
              const long sx = static_cast<long>(xx) + kx - 1;
              if (!inside(sy, sx, d)) continue;
              acc += k[((co * d.in_channels + ci) * 3 + ky) * 3 + kx] *
                     x[ci * hw + static_cast<std::size_t>(sy) * d.width + static_cast<std::size_t>(sx)];
            }
        out[co * hw + y * d.width + xx] += acc;
      }
}

void conv3x3_grad_input(std::span<const double> grad_out, std::span<const double> k,
                        std::span<double> grad_x, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  for (std::size_t co = 0; co < d.out_channels; ++co)
    for (std::size_t y = 0; y < d.height; ++y)
      for (std::size_t xx = 0; xx < d.width; ++xx) {
        const double g = grad_out[co * hw + y * d.width + xx];
        for (std::size_t ci = 0; ci < d.in_channels; ++ci)
          for (long ky = 0; ky < 3; ++ky)
            for (long kx = 0; kx < 3; ++kx) {
              const long sy = static_cast<long>(y) + ky - 1;
              const long sx = static_cast<long>(xx) + kx - 1;
              if (!inside(sy, sx, d)) continue;
              grad_x[ci * hw + static_cast<std::size_t>(sy) * d.width + static_cast<std::size_t>(sx)] +=
                  g * k[((co * d.in_channels + ci) * 3 + ky) * 3 + kx];
            }
      }
}

void conv3x3_grad_kernel(std::span<const double> grad_out, std::span<const double> x,
                         std::span<double> grad_k, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  for (std::size_t co = 0; co < d.out_channels; ++co)
    for (std::size_t ci = 0; ci < d.in_channels; ++ci)
      for (long ky = 0; ky < 3; ++ky)
        for (long kx = 0; kx < 3; ++kx) {
          double acc = 0.0;
          for (std::size_t y = 0; y < d.height; ++y)
            for (std::size_t xx = 0; xx < d.width; ++xx) {
              const long sy = static_cast<long>(y) + ky - 1;
              const long sx = static_cast<long>(xx) + kx - 1;
              if (!inside(sy, sx, d)) continue;
              acc += grad_out[co * hw + y * d.width + xx] *
                     x[ci * hw + static_cast<std::size_t>(sy) * d.width + static_cast<std::size_t>(sx)];
            }
          grad_k[((co * d.in_channels + ci) * 3 + ky) * 3 + kx] += acc;
        }
}

}  // namespace gramformer::kernels::serial
