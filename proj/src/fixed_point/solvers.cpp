// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixed_point/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diffgraph/ops.hpp"
#include "error.hpp"
#include "fixed_point/cg.hpp"

namespace mnm {
namespace {

// Denominator floor for relative changes; lets iterates that converge to 0 terminate.
constexpr double kNormFloor = 1e-12;

void check_lambda(const SolverConfig& cfg, double lambda) {
  if (std::abs(cfg.lambda - lambda) > 1e-12 * std::max(1.0, std::abs(lambda))) {
    throw InvalidArgument("solver: config lambda " + std::to_string(cfg.lambda) + " does not mirror operator lambda " +
                          std::to_string(lambda));
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw InvalidArgument("SolverConfig: gamma must be > 0");
  if (!(lambda > 0.0)) throw InvalidArgument("SolverConfig: lambda must be > 0");
  if (step() > 1.0 + 1e-12) throw InvalidArgument("SolverConfig: gamma * lambda must be <= 1");
  if (!(alpha > 0.0)) throw InvalidArgument("SolverConfig: alpha must be > 0");
  if (!(tol > 0.0) || !(backward_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidArgument("SolverConfig: tolerances must be > 0");
  if (max_iter < 1 || backward_max_iter < 1 || inner_max_iter < 1) {
    throw InvalidArgument("SolverConfig: iteration limits must be positive");
  }
}

FixedPointResult iterate_fixed_point(const StepFn& step, Tensor x0, double tol, int max_iter) {
  FixedPointResult res;
  res.x_star = std::move(x0);
  // A local contraction shrinks successive step lengths; growth past 10x the
  // first step means the iterates left the basin.
  double first_step = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Tensor next = step(res.x_star);
    const double step_len = norm(next - res.x_star);
    const double change = step_len / std::max(norm(res.x_star), kNormFloor);
    res.residuals.push_back(change);
    res.iterations = k + 1;
    if (k == 0) first_step = step_len;
    if (!std::isfinite(change) || (k > 0 && step_len > 10.0 * first_step && change > tol)) {
      throw DivergenceError("fixed point iteration diverged at step " + std::to_string(k + 1), res.residuals);
    }
    res.x_star = std::move(next);
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

FixedPointResult steepest_descent_fp_aHb(const ops::CombinedOperator& op, const Tensor& aHb, const Tensor& x0,
                                         const SolverConfig& cfg) {
  cfg.validate();
  check_lambda(cfg, op.lambda);
  require_same_shape("steepest_descent_fp", aHb, x0);
  const double rho = cfg.step();
  auto step = [&](const Tensor& x) {
    Tensor next = x;
    next.axpy(-rho, ops::combined_Q(op, x));
    next.axpy(rho, aHb);
    return next;
  };
  return iterate_fixed_point(step, x0, cfg.tol, cfg.max_iter);
}

FixedPointResult steepest_descent_fp(const ops::CombinedOperator& op, const mri::KSpaceData& b, const Tensor& x0,
                                     const SolverConfig& cfg) {
  return steepest_descent_fp_aHb(op, mri::apply_AH(b, op.mm), x0, cfg);
}

Tensor solve_data_prox(const mri::MeasurementModel& mm, const Tensor& r, double c, double tol, int max_iter) {
  auto map = [&mm, c](const Tensor& y) {
    Tensor out = mri::apply_AHA(y, mm);
    out *= c;
    out += y;
    return out;
  };
  return cg_solve(map, r, tol, max_iter).solution;
}

FixedPointResult forward_backward_fp_aHb(const ops::Score& f, const mri::MeasurementModel& mm, const Tensor& aHb,
                                         const Tensor& x0, const SolverConfig& cfg) {
  cfg.validate();
  require_same_shape("forward_backward_fp", aHb, x0);
  const double c = cfg.alpha * cfg.lambda;
  auto step = [&](const Tensor& x) {
    Tensor r = x;
    r.axpy(-cfg.alpha, ops::score_apply(f, x));
    r.axpy(c, aHb);
    return solve_data_prox(mm, r, c, cfg.inner_tol, cfg.inner_max_iter);
  };
  return iterate_fixed_point(step, x0, cfg.tol, cfg.max_iter);
}

FixedPointResult forward_backward_fp(const ops::Score& f, const mri::MeasurementModel& mm, const mri::KSpaceData& b,
                                     const Tensor& x0, const SolverConfig& cfg) {
  return forward_backward_fp_aHb(f, mm, mri::apply_AH(b, mm), x0, cfg);
}

ad::Var steepest_descent_step(const ops::CombinedOperator& op, ad::Var x, const ops::OperatorBinding& b, ad::Var aHb,
                              double rho) {
  ad::Var q = ops::combined_Q(op, x, b);
  return ad::add(ad::sub(x, ad::scale(q, rho)), ad::scale(aHb, rho));
}

ad::Var forward_backward_step(const ops::Score& f, const mri::MeasurementModel& mm, ad::Var x,
                              const ops::OperatorBinding& b, ad::Var aHb, const SolverConfig& cfg) {
  const double alpha = cfg.alpha;
  ad::Var r = ad::sub(x, ad::scale(ops::score_apply(f, x, b.params), alpha));
  r = ad::add(r, ad::scale(ad::scale(aHb, b.lambda), alpha));

  const double lambda = b.lambda.value().item();
  const double c = alpha * lambda;
  const double tol = cfg.inner_tol;
  const int max_iter = cfg.inner_max_iter;
  Tensor y = solve_data_prox(mm, r.value(), c, tol, max_iter);
  ad::Graph& g = x.graph();
  return g.record("data_prox", {r, b.lambda}, y,
                  [mm, y, c, alpha, tol, max_iter](const Tensor& go, std::span<Tensor* const> gp) {
                    const Tensor w = solve_data_prox(mm, go, c, tol, max_iter);
                    if (gp[0]) *gp[0] += w;
                    if (gp[1]) (*gp[1])[0] -= alpha * dot(w, mri::apply_AHA(y, mm));
                  });
}

DeqGradients implicit_backward(const StepGraphFn& step, const BindFn& bind, const Tensor& x_star, const Tensor& aHb,
                               const Tensor& dl_dx, double tol, int max_iter) {
  require_same_shape("deq_backward", x_star, dl_dx);
  DeqGradients out;
  out.aHb = Tensor::zeros_like(aHb);

  Tensor u = dl_dx;
  if (norm(dl_dx) > 0.0) {
    ad::Graph g;
    ad::Var x = g.leaf(x_star, true);
    ops::OperatorBinding frozen = bind(g, false, false);
    ad::Var rhs = g.constant(aHb);
    ad::Var y = step(x, frozen, rhs);
    bool converged = false;
    for (int k = 0; k < max_iter; ++k) {
      g.backward(y, u);
      Tensor next = g.adjoint(x);
      next += dl_dx;
      const double change = norm(next - u) / std::max(norm(u), kNormFloor);
      out.residuals.push_back(change);
      out.iterations = k + 1;
      u = std::move(next);
      if (!std::isfinite(change)) break;
      if (change <= tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("deq_backward: adjoint iteration did not converge in " + std::to_string(max_iter) +
                                 " iterations",
                             out.residuals.empty() ? 0.0 : out.residuals.back(), out.residuals);
    }
  }

  ad::Graph g;
  ad::Var x = g.constant(x_star);
  ops::OperatorBinding live = bind(g, true, true);
  ad::Var rhs = g.leaf(aHb, true);
  ad::Var y = step(x, live, rhs);
  g.backward(y, u);
  for (const ad::Var& p : live.params) out.params.push_back(g.adjoint(p));
  out.lambda = g.adjoint(live.lambda).item();
  out.aHb = g.adjoint(rhs);
  if (norm(dl_dx) == 0.0) {
    for (Tensor& p : out.params) p.fill(0.0);
    out.lambda = 0.0;
    out.aHb.fill(0.0);
  }
  return out;
}

DeqGradients deq_backward(const ops::CombinedOperator& op, const Tensor& x_star, const Tensor& aHb,
                          const Tensor& dl_dx, const SolverConfig& cfg) {
  cfg.validate();
  check_lambda(cfg, op.lambda);
  const double rho = cfg.step();
  auto step = [&op, rho](ad::Var x, const ops::OperatorBinding& b, ad::Var rhs) {
    return steepest_descent_step(op, x, b, rhs, rho);
  };
  auto binder = [&op](ad::Graph& g, bool pg, bool lg) { return ops::bind(op, g, pg, lg); };
  return implicit_backward(step, binder, x_star, aHb, dl_dx, cfg.backward_tol, cfg.backward_max_iter);
}

DeqGradients deq_backward_fb(const ops::Score& f, const mri::MeasurementModel& mm, double lambda,
                             const Tensor& x_star, const Tensor& aHb, const Tensor& dl_dx, const SolverConfig& cfg) {
  cfg.validate();
  check_lambda(cfg, lambda);
  auto step = [&f, &mm, &cfg](ad::Var x, const ops::OperatorBinding& b, ad::Var rhs) {
    return forward_backward_step(f, mm, x, b, rhs, cfg);
  };
  auto binder = [&f, lambda](ad::Graph& g, bool pg, bool lg) {
    return ops::OperatorBinding{ops::bind_parameters(f, g, pg), g.leaf(Tensor::scalar(lambda), lg)};
  };
  return implicit_backward(step, binder, x_star, aHb, dl_dx, cfg.backward_tol, cfg.backward_max_iter);
}

}  // namespace mnm
