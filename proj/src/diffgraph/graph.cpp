// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffgraph/graph.hpp"

#include "error.hpp"

namespace mnm::ad {

Var Graph::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{"leaf", std::move(value), {}, {}, requires_grad});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(const char* op, std::vector<Var> parents, Tensor value, BackwardRule rule) {
  Node node{op, std::move(value), {}, std::move(rule), false};
  node.parents.reserve(parents.size());
  for (const Var& p : parents) {
    check_owner(p);
    node.parents.push_back(p.id());
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (node.requires_grad && !node.rule) {
    throw InvalidArgument(std::string(op) + ": differentiable inputs but no backward rule");
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::check_owner(Var v) const {
  if (v.graph_ != this || v.id_ >= nodes_.size()) throw InvalidArgument("variable does not belong to this graph");
}

const Tensor& Graph::value(Var v) const {
  check_owner(v);
  return nodes_[v.id()].value;
}

bool Graph::requires_grad(Var v) const {
  check_owner(v);
  return nodes_[v.id()].requires_grad;
}

bool Graph::is_leaf(Var v) const {
  check_owner(v);
  return nodes_[v.id()].parents.empty() && !nodes_[v.id()].rule;
}

void Graph::backward(Var root, const Tensor& seed) {
  check_owner(root);
  require_same_shape("backward", nodes_[root.id()].value, seed);
  adjoints_.assign(nodes_.size(), Tensor());
  has_adjoint_.assign(nodes_.size(), 0);
  adjoints_[root.id()] = seed;
  has_adjoint_[root.id()] = 1;

  std::vector<Tensor*> parent_grads;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!has_adjoint_[i] || !node.requires_grad || node.parents.empty()) continue;
    parent_grads.assign(node.parents.size(), nullptr);
    for (std::size_t k = 0; k < node.parents.size(); ++k) {
      const std::size_t p = node.parents[k];
      if (!nodes_[p].requires_grad) continue;
      if (!has_adjoint_[p]) {
        adjoints_[p] = Tensor::zeros_like(nodes_[p].value);
        has_adjoint_[p] = 1;
      }
      parent_grads[k] = &adjoints_[p];
    }
    node.rule(adjoints_[i], parent_grads);
  }
}

Tensor Graph::adjoint(Var v) const {
  check_owner(v);
  if (v.id() < has_adjoint_.size() && has_adjoint_[v.id()]) return adjoints_[v.id()];
  return Tensor::zeros_like(nodes_[v.id()].value);
}

std::vector<Tensor> Graph::grad(Var root, std::span<const Var> leaves) {
  check_owner(root);
  if (!nodes_[root.id()].value.is_scalar()) {
    throw ShapeError("grad: root must be a scalar, got shape " + shape_string(nodes_[root.id()].value.shape()));
  }
  for (const Var& l : leaves) {
    if (!is_leaf(l)) throw InvalidArgument("grad: requested gradient with respect to a non-leaf node");
  }
  backward(root, Tensor::scalar(1.0));
  std::vector<Tensor> out;
  out.reserve(leaves.size());
  for (const Var& l : leaves) out.push_back(adjoint(l));
  return out;
}

Tensor vjp(const std::function<Var(Var)>& f, const Tensor& x, const Tensor& v) {
  Graph g;
  Var xv = g.leaf(x);
  Var y = f(xv);
  if (y.shape() != v.shape()) {
    throw ShapeError("vjp: cotangent shape " + shape_string(v.shape()) + " does not match output shape " +
                     shape_string(y.shape()));
  }
  g.backward(y, v);
  return g.adjoint(xv);
}

}  // namespace mnm::ad
