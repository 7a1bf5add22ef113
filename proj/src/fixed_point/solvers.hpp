// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// DEQ forward solvers and implicit backpropagation.
//
// Steepest descent on Q(x) = A^H b with step rho = gamma * lambda:
//   T(x) = x - rho (A^H A x - A^H b) - (rho / lambda) F(x)
// Forward-backward splitting (MOL baseline), M = I + alpha lambda A^H A:
//   T(x) = M^{-1} (x - alpha F(x) + alpha lambda A^H b)
// Both have fixed points satisfying lambda A^H (A x - b) + F(x) = 0.

#pragma once

#include <functional>
#include <vector>

#include "diffgraph/graph.hpp"
#include "diffgraph/tensor.hpp"
#include "mri/measurement.hpp"
#include "operators/combined.hpp"

namespace mnm {

struct SolverConfig {
  double gamma = 0.1;    // steepest-descent step; gamma * lambda <= 1
  double lambda = 10.0;  // mirrors the operator's lambda
  double alpha = 1.0;    // forward-backward step
  double tol = 1e-5;     // relative iterate change
  int max_iter = 100;
  double backward_tol = 1e-5;
  int backward_max_iter = 100;
  double inner_tol = 1e-10;  // CG inside forward-backward
  int inner_max_iter = 200;
  double m_assumed = 0.1;

  double step() const { return gamma * lambda; }
  /// Throws InvalidArgument if any field is out of range.
  void validate() const;
};

struct FixedPointResult {
  Tensor x_star;
  std::vector<double> residuals;  // ||x_{k+1} - x_k|| / ||x_k|| per update
  int iterations = 0;
  bool converged = false;
};

using StepFn = std::function<Tensor(const Tensor&)>;

/// Iterates x <- step(x) until the relative change is <= tol. Throws
/// DivergenceError if a step grows past 10x the length of the first one or
/// the iterate turns non-finite.
FixedPointResult iterate_fixed_point(const StepFn& step, Tensor x0, double tol, int max_iter);

FixedPointResult steepest_descent_fp(const ops::CombinedOperator& op, const mri::KSpaceData& b, const Tensor& x0,
                                     const SolverConfig& cfg);
/// Same, with A^H b precomputed.
FixedPointResult steepest_descent_fp_aHb(const ops::CombinedOperator& op, const Tensor& aHb, const Tensor& x0,
                                         const SolverConfig& cfg);

/// Solves (I + c A^H A) y = r by CG.
Tensor solve_data_prox(const mri::MeasurementModel& mm, const Tensor& r, double c, double tol, int max_iter);

FixedPointResult forward_backward_fp(const ops::Score& f, const mri::MeasurementModel& mm, const mri::KSpaceData& b,
                                     const Tensor& x0, const SolverConfig& cfg);
FixedPointResult forward_backward_fp_aHb(const ops::Score& f, const mri::MeasurementModel& mm, const Tensor& aHb,
                                         const Tensor& x0, const SolverConfig& cfg);

/// Graph form of one steepest-descent step, differentiable in x, the bound
/// parameters, lambda and aHb. rho is held constant.
ad::Var steepest_descent_step(const ops::CombinedOperator& op, ad::Var x, const ops::OperatorBinding& b, ad::Var aHb,
                              double rho);
/// Graph form of one forward-backward step; lambda enters through both the
/// score weight and the data-prox inverse.
ad::Var forward_backward_step(const ops::Score& f, const mri::MeasurementModel& mm, ad::Var x,
                              const ops::OperatorBinding& b, ad::Var aHb, const SolverConfig& cfg);

struct DeqGradients {
  std::vector<Tensor> params;  // bind() order of the score
  double lambda = 0.0;
  Tensor aHb;                  // dL / d(A^H b); dL/db = A applied to this
  int iterations = 0;
  std::vector<double> residuals;
};

/// Builds T(x) on a graph from bound leaves.
using StepGraphFn = std::function<ad::Var(ad::Var x, const ops::OperatorBinding& b, ad::Var aHb)>;
using BindFn = std::function<ops::OperatorBinding(ad::Graph& g, bool params_grad, bool lambda_grad)>;

/// Implicit backward pass: solves u = J_x(T)^T u + dl_dx by fixed-point
/// iteration at x_star, then pulls u back to parameters, lambda and aHb.
DeqGradients implicit_backward(const StepGraphFn& step, const BindFn& bind, const Tensor& x_star, const Tensor& aHb,
                               const Tensor& dl_dx, double tol, int max_iter);

DeqGradients deq_backward(const ops::CombinedOperator& op, const Tensor& x_star, const Tensor& aHb,
                          const Tensor& dl_dx, const SolverConfig& cfg);
DeqGradients deq_backward_fb(const ops::Score& f, const mri::MeasurementModel& mm, double lambda,
                             const Tensor& x_star, const Tensor& aHb, const Tensor& dl_dx, const SolverConfig& cfg);

}  // namespace mnm
