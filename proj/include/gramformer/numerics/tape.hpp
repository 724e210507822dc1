// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gramformer/numerics/tensor.hpp"

namespace gramformer {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  bool valid() const noexcept { return tape != nullptr; }
  const Tensor& value() const;
  const Shape& dims() const { return value().dims(); }
};

/// Reverse-mode recorder. Every op appends a node holding its output value and
/// a closure that maps the node's output gradient onto its inputs' gradients.
/// backward() walks the nodes in exact reverse order of recording.
///
/// Parameters enter through parameter(); their gradients are added into the
/// bound Tensor's grad slot at the end of each backward() call, so repeated
/// calls accumulate.
class Tape {
 public:
  /// Receives the gradient of the node's output. Reads inputs through
  /// Tape::value and adds into them through Tape::grad.
  using BackwardFn = std::function<void(Tape&, std::span<const double> grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Binds a leaf to external storage. The tensor must outlive the tape.
  Var parameter(Tensor& param);

  Var record(std::string_view op, Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward) {
    return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient slot of v, allocated as zeros on first access.
  std::span<double> grad(Var v);
  std::string_view op(Var v) const { return nodes_[v.id].op; }

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates. loss must hold exactly one value.
  void backward(Var loss);

  /// Test hook: multiplies the incoming gradient of every node recorded as
  /// `op` by `scale` during backward().
  void inject_backward_fault(std::string op, double scale);

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Tensor* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::string fault_op_;
  double fault_scale_ = 1.0;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

}  // namespace gramformer
