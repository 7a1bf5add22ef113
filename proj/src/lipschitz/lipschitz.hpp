// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Local Lipschitz estimation by projected gradient ascent:
//   L = max_{z1, z2 in B} ||H(z2) - H(z1)|| / ||z2 - z1||
// The ascent works on the squared ratio and reports its square root. The
// result is a lower bound on the true local constant.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "diffgraph/graph.hpp"
#include "diffgraph/tensor.hpp"

namespace mnm::lip {

/// Closed ball {z : ||z - center|| <= radius()}. With `relative` set (the
/// default) the radius is delta * ||center||, otherwise delta itself.
struct BallSpec {
  Tensor center;
  double delta = 0.0;
  bool relative = true;

  double radius() const;
};

Tensor project_ball(const Tensor& z, const BallSpec& ball);

using DiffOperator = std::function<ad::Var(ad::Var)>;

struct LipschitzEstimate {
  double L = 0.0;
  Tensor z1, z2;
  std::vector<double> ascent_trace;  // best ratio so far after each step
};

/// `step_size` is the initial step as a fraction of the ball radius (0.1 by
/// default). A step that lowers the ratio is retried with the step halved; an
/// accepted step doubles the next one, capped at the ball diameter.
LipschitzEstimate estimate_local_lipschitz(const DiffOperator& h, const BallSpec& ball, int steps,
                                           double step_size, std::uint64_t seed);

/// ||H(z2) - H(z1)|| / ||z2 - z1|| as a graph node; differentiable through
/// whatever leaves H closes over.
ad::Var lipschitz_ratio(const DiffOperator& h, ad::Var z1, ad::Var z2);

/// Plain evaluation of the same ratio.
double lipschitz_ratio(const std::function<Tensor(const Tensor&)>& h, const Tensor& z1, const Tensor& z2);

}  // namespace mnm::lip
