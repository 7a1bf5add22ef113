// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable primitives. Every function records one node with a backward
// rule; shape errors name the op and both operand shapes.

#pragma once

#include <functional>

#include "diffgraph/graph.hpp"

namespace mnm::ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
/// s * a where s is a scalar node.
Var scale(Var a, Var s);
Var mul(Var a, Var b);
Var relu(Var a);
/// Circular 2-D convolution, see kernels::conv2d for layouts.
Var conv2d(Var x, Var weight, Var bias);
Var conv2d(Var x, Var weight);
/// Real inner product over all elements (Re<a, b> for complex planes).
Var inner(Var a, Var b);
/// Euclidean norm; the gradient at 0 is taken as 0.
Var norm2(Var a);

// Scalar helpers used by ratio-type objectives.
Var div(Var a, Var b);
Var sqrt(Var a);

/// A linear map with a known adjoint, e.g. the MRI normal operator.
using LinearFn = std::function<Tensor(const Tensor&)>;
Var linear(const char* op, Var x, const LinearFn& forward, const LinearFn& adjoint);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace mnm::ad
