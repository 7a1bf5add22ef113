// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixed_point/deq_model.hpp"

#include "operators/combined.hpp"

namespace mnm {

SolverConfig DeqModel::synced_config() const {
  SolverConfig c = cfg;
  const double rho = cfg.step();
  c.lambda = lambda;
  c.gamma = rho / lambda;
  return c;
}

FixedPointResult DeqModel::solve(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x0) const {
  const SolverConfig c = synced_config();
  if (solver == SolverKind::steepest_descent) {
    return steepest_descent_fp_aHb(ops::CombinedOperator(score, mm, lambda), aHb, x0, c);
  }
  return forward_backward_fp_aHb(score, mm, aHb, x0, c);
}

DeqGradients DeqModel::backward(const mri::MeasurementModel& mm, const Tensor& x_star, const Tensor& aHb,
                                const Tensor& dl_dx) const {
  const SolverConfig c = synced_config();
  if (solver == SolverKind::steepest_descent) {
    return deq_backward(ops::CombinedOperator(score, mm, lambda), x_star, aHb, dl_dx, c);
  }
  return deq_backward_fb(score, mm, lambda, x_star, aHb, dl_dx, c);
}

Tensor DeqModel::step(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x) const {
  const SolverConfig c = synced_config();
  if (solver == SolverKind::steepest_descent) {
    const ops::CombinedOperator op(score, mm, lambda);
    Tensor next = x;
    next.axpy(-c.step(), ops::combined_Q(op, x));
    next.axpy(c.step(), aHb);
    return next;
  }
  Tensor r = x;
  r.axpy(-c.alpha, ops::score_apply(score, x));
  r.axpy(c.alpha * lambda, aHb);
  return solve_data_prox(mm, r, c.alpha * lambda, c.inner_tol, c.inner_max_iter);
}

double DeqModel::equation_residual(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x) const {
  Tensor r = mri::apply_AHA(x, mm);
  r -= aHb;
  r *= lambda;
  r += ops::score_apply(score, x);
  return norm(r) / (lambda * norm(aHb));
}

}  // namespace mnm
