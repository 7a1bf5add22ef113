// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "mri/sense.hpp"

#include "error.hpp"
#include "fixed_point/cg.hpp"

namespace mnm::mri {

Tensor sense_init(const KSpaceData& b, const MeasurementModel& mm, const SenseOptions& opts) {
  if (!(opts.mu >= 0.0)) throw InvalidArgument("sense_init: mu must be >= 0");
  const Tensor rhs = apply_AH(b, mm);
  const double mu = opts.mu;
  auto normal = [&mm, mu](const Tensor& x) {
    Tensor y = apply_AHA(x, mm);
    if (mu != 0.0) y.axpy(mu, x);
    return y;
  };
  return cg_solve(normal, rhs, opts.tol, opts.max_iter).solution;
}

}  // namespace mnm::mri
