// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "operators/combined.hpp"

#include "diffgraph/ops.hpp"
#include "error.hpp"

namespace mnm::ops {

CombinedOperator::CombinedOperator(Score s, mri::MeasurementModel m, double l)
    : score(std::move(s)), mm(std::move(m)), lambda(l) {
  if (!(lambda > 0.0)) throw InvalidArgument("CombinedOperator: lambda must be > 0");
}

OperatorBinding bind(const CombinedOperator& op, ad::Graph& g, bool params_grad, bool lambda_grad) {
  return {bind_parameters(op.score, g, params_grad), g.leaf(Tensor::scalar(op.lambda), lambda_grad)};
}

Tensor combined_Q(const CombinedOperator& op, const Tensor& x) {
  Tensor q = mri::apply_AHA(x, op.mm);
  q.axpy(1.0 / op.lambda, score_apply(op.score, x));
  return q;
}

Tensor residual_H(const CombinedOperator& op, const Tensor& x) { return x - combined_Q(op, x); }

ad::Var combined_Q(const CombinedOperator& op, ad::Var x, const OperatorBinding& b) {
  ad::Graph& g = x.graph();
  ad::Var inv_lambda = ad::div(g.constant(Tensor::scalar(1.0)), b.lambda);
  return ad::add(mri::apply_AHA(x, op.mm), ad::scale(score_apply(op.score, x, b.params), inv_lambda));
}

ad::Var residual_H(const CombinedOperator& op, ad::Var x, const OperatorBinding& b) {
  return ad::sub(x, combined_Q(op, x, b));
}

double monotonicity_probe(const CombinedOperator& op, const Tensor& z1, const Tensor& z2) {
  const Tensor d = z1 - z2;
  const double dd = squared_norm(d);
  if (dd == 0.0) throw InvalidArgument("monotonicity_probe: z1 and z2 coincide");
  return dot(d, combined_Q(op, z1) - combined_Q(op, z2)) / dd;
}

}  // namespace mnm::ops
