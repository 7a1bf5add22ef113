// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixed_point/cg.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace mnm {

CgResult cg_solve(const LinearMap& map, const Tensor& rhs, double tol, int max_iter) {
  if (tol <= 0.0 || max_iter < 1) throw InvalidArgument("cg_solve: tol must be > 0 and max_iter >= 1");
  CgResult result{Tensor::zeros_like(rhs), 0, 0.0};
  const double rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) return result;

  Tensor r = rhs;
  Tensor p = rhs;
  double rr = squared_norm(r);
  for (int it = 1; it <= max_iter; ++it) {
    const Tensor q = map(p);
    require_same_shape("cg_solve", q, p);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw InvalidArgument("cg_solve: map is not positive definite (p'Mp = " + std::to_string(pq) + ")");
    const double alpha = rr / pq;
    result.solution.axpy(alpha, p);
    r.axpy(-alpha, q);
    const double rr_new = squared_norm(r);
    result.iterations = it;
    result.relative_residual = std::sqrt(rr_new) / rhs_norm;
    if (result.relative_residual <= tol) return result;
    const double beta = rr_new / rr;
    p *= beta;
    p += r;
    rr = rr_new;
  }
  throw ConvergenceError("cg_solve: no convergence after " + std::to_string(max_iter) +
                             " iterations, relative residual " + std::to_string(result.relative_residual),
                         result.relative_residual);
}

}  // namespace mnm
