// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tape-based reverse-mode differentiation. Nodes are appended in evaluation
// order, so the tape itself is a topological order and the backward sweep
// simply walks it in reverse.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "diffgraph/tensor.hpp"

namespace mnm::ad {

class Graph;

/// Handle to a node on a Graph. Cheap to copy; only valid while the graph lives.
class Var {
 public:
  Var() = default;
  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Accumulates parent cotangents from the output cotangent. Entries of
/// `parent_grads` are null for parents that do not require a gradient.
using BackwardRule = std::function<void(const Tensor& grad_out, std::span<Tensor* const> parent_grads)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends an op node. `rule` may be empty when no parent requires a gradient.
  Var record(const char* op, std::vector<Var> parents, Tensor value, BackwardRule rule);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  bool is_leaf(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Runs a reverse sweep seeded with `seed` at `root`. Previous adjoints are
  /// discarded, so the same graph can be swept repeatedly with new seeds.
  void backward(Var root, const Tensor& seed);

  /// Adjoint of `v` from the last backward sweep; zeros if untouched.
  Tensor adjoint(Var v) const;

  /// d(root)/d(leaf) for each leaf. `root` must have shape [].
  std::vector<Tensor> grad(Var root, std::span<const Var> leaves);

 private:
  struct Node {
    const char* op;
    Tensor value;
    std::vector<std::size_t> parents;
    BackwardRule rule;
    bool requires_grad;
  };

  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;
  std::vector<char> has_adjoint_;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

/// vᵀ ∂f/∂x evaluated at x, shaped like x.
Tensor vjp(const std::function<Var(Var)>& f, const Tensor& x, const Tensor& v);

}  // namespace mnm::ad
