// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mri/measurement.hpp"

namespace mnm::mri {

struct SenseOptions {
  double mu = 1e-2;
  double tol = 1e-6;
  int max_iter = 200;
};

/// Regularized least squares: solves (A^H A + mu I) x = A^H b by CG.
Tensor sense_init(const KSpaceData& b, const MeasurementModel& mm, const SenseOptions& opts = {});

}  // namespace mnm::mri
