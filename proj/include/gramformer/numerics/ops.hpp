// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gramformer/numerics/tape.hpp"

// Differentiable operations on tape values. Each op checks shapes, computes
// the forward value and records its backward rule. There is no implicit
// broadcasting; bias adds are explicit ops.
namespace gramformer::ops {

// Matrix products. a: M×K, b: K×P.
Var matmul(Var a, Var b);
Var transpose(Var a);

// Elementwise, identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

// x: N×C plus b: C on every row.
Var add_row_bias(Var x, Var bias);
// x: R×P plus b: R on every column (per-channel bias on flattened maps).
Var add_col_bias(Var x, Var bias);

Var relu(Var x);
Var sigmoid(Var x);
Var abs(Var x);

/// Row-wise softmax of a rank-2 tensor, max-shifted.
Var softmax_rows(Var x);

/// Per-row normalization over the last axis of x: N×C, population variance.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// 3×3 cross-correlation with zero padding 1. x: Ci×H×W, kernel: Co×Ci×3×3.
Var conv2d_3x3(Var x, Var kernel, Var bias);
/// 1×1 convolution as a matrix product over flattened positions. kernel: Co×Ci.
Var conv2d_1x1(Var x, Var kernel, Var bias);
/// Nearest-neighbour 2× upsampling of C×H×W.
Var upsample2x(Var x);

Var reshape(Var x, Shape dims);
/// Concatenate rank-2 tensors with equal row counts along columns.
Var concat_cols(std::span<const Var> parts);
/// Rows of x: N×C selected by index (repeats allowed). Backward scatter-adds.
Var gather_rows(Var x, std::span<const std::size_t> rows);

Var sum(Var x);
Var mean(Var x);

/// N×C node matrix (row-major grid order) to C×H×W feature map and back.
Var nodes_to_grid(Var nodes, std::size_t height, std::size_t width);
Var grid_to_nodes(Var grid);

}  // namespace gramformer::ops
