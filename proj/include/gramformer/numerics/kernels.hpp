// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

// Dense inner loops behind the tape ops. Two implementations share one
// signature set:
//
//   kernels::serial    straightforward loops, kept as the reference
//   kernels::parallel  OpenMP over output rows / channels, cache-friendly order
//
// Every kernel ACCUMULATES into its output (out += ...). Callers zero the
// output for a plain evaluation. Each output element is owned by exactly one
// thread and summed in a fixed order, so parallel results do not depend on the
// thread count.

namespace gramformer::kernels {

struct MatmulDims {
  std::size_t m;  // rows of a
  std::size_t k;  // inner
  std::size_t p;  // cols of b
};

struct ConvDims {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;
};

namespace serial {

// c[m×p] += a[m×k] · b[k×p]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);
// c[m×k] += a[m×p] · b[k×p]ᵀ
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);
// c[k×p] += a[m×k]ᵀ · b[m×p]
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);

// 3×3 cross-correlation, zero padding 1. x: Ci×H×W, k: Co×Ci×3×3, out: Co×H×W.
void conv3x3(std::span<const double> x, std::span<const double> k, std::span<double> out, ConvDims d);
void conv3x3_grad_input(std::span<const double> grad_out, std::span<const double> k,
                        std::span<double> grad_x, ConvDims d);
void conv3x3_grad_kernel(std::span<const double> grad_out, std::span<const double> x,
                         std::span<double> grad_k, ConvDims d);

}  // namespace serial

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d);

void conv3x3(std::span<const double> x, std::span<const double> k, std::span<double> out, ConvDims d);
void conv3x3_grad_input(std::span<const double> grad_out, std::span<const double> k,
                        std::span<double> grad_x, ConvDims d);
void conv3x3_grad_kernel(std::span<const double> grad_out, std::span<const double> x,
                         std::span<double> grad_k, ConvDims d);

}  // namespace parallel

}  // namespace gramformer::kernels
