// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "diffgraph/tensor.hpp"

namespace mnm {

using LinearMap = std::function<Tensor(const Tensor&)>;

struct CgResult {
  Tensor solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradient for a symmetric positive definite map, started from
/// zero. Stops once ||rhs - M x|| <= tol * ||rhs||; throws ConvergenceError
/// carrying the final residual if max_iter is exhausted first.
CgResult cg_solve(const LinearMap& map, const Tensor& rhs, double tol, int max_iter);

}  // namespace mnm
