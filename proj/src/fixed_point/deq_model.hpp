// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fixed_point/solvers.hpp"
#include "mri/measurement.hpp"
#include "operators/score_network.hpp"

namespace mnm {

enum class SolverKind { steepest_descent, forward_backward };

/// A score network plus the solver that turns it into a reconstruction map
/// b -> x*(b). The measurement model is supplied per call because every
/// sample has its own mask and coil maps.
struct DeqModel {
  SolverKind solver = SolverKind::steepest_descent;
  ops::Score score;
  double lambda = 10.0;
  SolverConfig cfg;

  /// cfg with lambda synced to the model and gamma = step / lambda.
  SolverConfig synced_config() const;

  FixedPointResult solve(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x0) const;
  DeqGradients backward(const mri::MeasurementModel& mm, const Tensor& x_star, const Tensor& aHb,
                        const Tensor& dl_dx) const;
  /// One application of the fixed-point map.
  Tensor step(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x) const;
  /// || lambda A^H (A x - b) + F(x) || / || lambda A^H b ||
  double equation_residual(const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x) const;
};

}  // namespace mnm
