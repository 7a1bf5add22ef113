// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
//   Q(x) = A^H A x + F(x) / lambda      (combined operator)
//   H(x) = x - Q(x)                      (its residual)
// Q is m-monotone on a set whenever H is (1 - m)-Lipschitz there.

#pragma once

#include <vector>

#include "diffgraph/graph.hpp"
#include "mri/measurement.hpp"
#include "operators/score_network.hpp"

namespace mnm::ops {

struct CombinedOperator {
  CombinedOperator(Score score, mri::MeasurementModel mm, double lambda);

  Score score;
  mri::MeasurementModel mm;
  double lambda;
};

/// Graph leaves for the learnable parts of a CombinedOperator.
struct OperatorBinding {
  std::vector<ad::Var> params;
  ad::Var lambda;
};

OperatorBinding bind(const CombinedOperator& op, ad::Graph& g, bool params_grad, bool lambda_grad);

Tensor combined_Q(const CombinedOperator& op, const Tensor& x);
Tensor residual_H(const CombinedOperator& op, const Tensor& x);
ad::Var combined_Q(const CombinedOperator& op, ad::Var x, const OperatorBinding& b);
ad::Var residual_H(const CombinedOperator& op, ad::Var x, const OperatorBinding& b);

/// Re<z1 - z2, Q(z1) - Q(z2)> / ||z1 - z2||^2. Throws if z1 == z2.
double monotonicity_probe(const CombinedOperator& op, const Tensor& z1, const Tensor& z2);

}  // namespace mnm::ops
