// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include "gramformer/numerics/kernels.hpp"

namespace gramformer::kernels::parallel {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1 << 15;

}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  const auto m = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.p > kParallelWork)
  for (std::int64_t i = 0; i < m; ++i) {
    double* crow = C + i * d.p;
    for (std::size_t t = 0; t < d.k; ++t) {
      const double av = A[i * d.k + t];
      if (av == 0.0) continue;
      const double* brow = B + t * d.p;
      for (std::size_t j = 0; j < d.p; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  const auto m = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.p > kParallelWork)
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = A + i * d.p;
    for (std::size_t t = 0; t < d.k; ++t) {
      const double* brow = B + t * d.p;
      double acc = 0.0;
      for (std::size_t j = 0; j < d.p; ++j) acc += arow[j] * brow[j];
      C[i * d.k + t] += acc;
    }
  }
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, MatmulDims d) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  const auto k = static_cast<std::int64_t>(d.k);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.p > kParallelWork)
  for (std::int64_t t = 0; t < k; ++t) {
    double* crow = C + t * d.p;
    for (std::size_t i = 0; i < d.m; ++i) {
      const double av = A[i * d.k + t];
      if (av == 0.0) continue;
      const double* brow = B + i * d.p;
      for (std::size_t j = 0; j < d.p; ++j) crow[j] += av * brow[j];
    }
  }
}

namespace {

// Valid output range [lo, hi) along one axis for a tap offset in {-1, 0, 1}.
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange tap_range(long offset, std::size_t extent) {
  const std::size_t lo = offset < 0 ? 1 : 0;
  const std::size_t hi = offset > 0 ? extent - 1 : extent;
  return {lo, std::max(lo, hi)};
}

}  // namespace

void conv3x3(std::span<const double> x, std::span<const double> k, std::span<double> out, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  const double* X = x.data();
  const double* K = k.data();
  double* O = out.data();
  const auto co_count = static_cast<std::int64_t>(d.out_channels);
#pragma omp parallel for schedule(static) if (d.out_channels * d.in_channels * hw * 9 > kParallelWork)
  for (std::int64_t co = 0; co < co_count; ++co) {
    double* oplane = O + co * hw;
    for (std::size_t ci = 0; ci < d.in_channels; ++ci) {
      const double* iplane = X + ci * hw;
      const double* taps = K + (co * d.in_channels + ci) * 9;
      for (long ky = 0; ky < 3; ++ky) {
        const TapRange ry = tap_range(ky - 1, d.height);
        for (long kx = 0; kx < 3; ++kx) {
          const double w = taps[ky * 3 + kx];
          if (w == 0.0) continue;
          const TapRange rx = tap_range(kx - 1, d.width);
          const std::ptrdiff_t shift = (ky - 1) * static_cast<std::ptrdiff_t>(d.width) + (kx - 1);
          for (std::size_t y = ry.lo; y < ry.hi; ++y) {
            double* orow = oplane + y * d.width;
            const double* irow = iplane + static_cast<std::ptrdiff_t>(y * d.width) + shift;
            for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) orow[xx] += w * irow[xx];
          }
        }
      }
    }
  }
}

void conv3x3_grad_input(std::span<const double> grad_out, std::span<const double> k,
                        std::span<double> grad_x, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  const double* G = grad_out.data();
  const double* K = k.data();
  double* GX = grad_x.data();
  const auto ci_count = static_cast<std::int64_t>(d.in_channels);
#pragma omp parallel for schedule(static) if (d.out_channels * d.in_channels * hw * 9 > kParallelWork)
  for (std::int64_t ci = 0; ci < ci_count; ++ci) {
    double* xplane = GX + ci * hw;
    for (std::size_t co = 0; co < d.out_channels; ++co) {
      const double* gplane = G + co * hw;
      const double* taps = K + (co * d.in_channels + ci) * 9;
      for (long ky = 0; ky < 3; ++ky) {
        const TapRange ry = tap_range(ky - 1, d.height);
        for (long kx = 0; kx < 3; ++kx) {
          const double w = taps[ky * 3 + kx];
          if (w == 0.0) continue;
          const TapRange rx = tap_range(kx - 1, d.width);
          const std::ptrdiff_t shift = (ky - 1) * static_cast<std::ptrdiff_t>(d.width) + (kx - 1);
          for (std::size_t y = ry.lo; y < ry.hi; ++y) {
            const double* grow = gplane + y * d.width;
            double* xrow = xplane + static_cast<std::ptrdiff_t>(y * d.width) + shift;
            for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) xrow[xx] += w * grow[xx];
          }
        }
      }
    }
  }
}

void conv3x3_grad_kernel(std::span<const double> grad_out, std::span<const double> x,
                         std::span<double> grad_k, ConvDims d) {
  const std::size_t hw = d.height * d.width;
  const double* G = grad_out.data();
  const double* X = x.data();
  double* GK = grad_k.data();
  const auto co_count = static_cast<std::int64_t>(d.out_channels);
#pragma omp parallel for schedule(static) if (d.out_channels * d.in_channels * hw * 9 > kParallelWork)
  for (std::int64_t co = 0; co < co_count; ++co) {
    const double* gplane = G + co * hw;
    for (std::size_t ci = 0; ci < d.in_channels; ++ci) {
      const double* iplane = X + ci * hw;
      double* taps = GK + (co * d.in_channels + ci) * 9;
      for (long ky = 0; ky < 3; ++ky) {
        const TapRange ry = tap_range(ky - 1, d.height);
        for (long kx = 0; kx < 3; ++kx) {
          const TapRange rx = tap_range(kx - 1, d.width);
          const std::ptrdiff_t shift = (ky - 1) * static_cast<std::ptrdiff_t>(d.width) + (kx - 1);
          double acc = 0.0;
          for (std::size_t y = ry.lo; y < ry.hi; ++y) {
            const double* grow = gplane + y * d.width;
            const double* irow = iplane + static_cast<std::ptrdiff_t>(y * d.width) + shift;
            for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) acc += grow[xx] * irow[xx];
          }
          taps[ky * 3 + kx] += acc;
        }
      }
    }
  }
}

}  // namespace gramformer::kernels::parallel
