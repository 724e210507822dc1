// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/numerics/tape.hpp"

#include <algorithm>

#include "gramformer/numerics/errors.hpp"

namespace gramformer {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node node;
  node.op = "constant";
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::parameter(Tensor& param) {
  Node node;
  node.op = "parameter";
  node.value = param;
  node.value.clear_grad();
  node.param = &param;
  node.requires_grad = true;
  return push(std::move(node));
}

Var Tape::record(std::string_view op, Tensor value, std::span<const Var> inputs,
                 BackwardFn backward) {
  Node node;
  node.op = std::string(op);
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape != this) throw ContractError("op '" + node.op + "' mixes values from different tapes");
    node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

std::span<double> Tape::grad(Var v) {
  auto& g = nodes_[v.id].grad;
  if (g.empty()) g.assign(nodes_[v.id].value.size(), 0.0);
  return g;
}

void Tape::inject_backward_fault(std::string op, double scale) {
  fault_op_ = std::move(op);
  fault_scale_ = scale;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to another tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(nodes_[loss.id].value.dims()));
  }
  for (auto& n : nodes_) n.grad.clear();
  grad(loss)[0] = 1.0;

  std::vector<double> scaled;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    if (!fault_op_.empty() && n.op == fault_op_) {
      scaled = n.grad;
      for (auto& g : scaled) g *= fault_scale_;
      n.backward(*this, scaled);
    } else {
      n.backward(*this, n.grad);
    }
  }

  // Parameters the loss does not reach still get a (zero) gradient slot.
  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    auto dst = n.param->ensure_grad();
    if (n.grad.empty()) continue;
    std::transform(dst.begin(), dst.end(), n.grad.begin(), dst.begin(), std::plus<>());
  }
}

}  // namespace gramformer
