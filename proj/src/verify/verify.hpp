// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Property suites over seeded synthetic instances. Each suite returns a
// pass/fail result with a one-line summary. The model suites take a trained
// model and the samples it is checked on.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trainer/trainer.hpp"
#include "verify/verify_config.hpp"

namespace mnm::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

using Logger = std::function<void(const std::string&)>;

/// On every configuration, pairs with H-ratio r satisfy
/// Re<d, Q(z1) - Q(z2)> / ||d||^2 >= 1 - r, and every pair in a ball whose
/// estimated constant L < 1 has quotient >= 1 - L.
SuiteResult lemma_monotone(const VerifyConfig& c);

/// Q = (beta / lambda) I: ||x_k - x*|| = ||x_0 - x*|| (1 - gamma lambda m)^k per iterate.
SuiteResult convergence_linear(const VerifyConfig& c);

/// Per-step contraction of steepest descent inside the ball is at most
/// (1 - gamma lambda m_cert) + 1e-3, with m_cert = 1 - L from a
/// certify_steps ascent around each fixed point.
SuiteResult convergence_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                              const VerifyConfig& c);

/// uniqueness_inits starts inside the ball around x* converge pairwise within
/// 10 tol ||x*||.
SuiteResult local_uniqueness(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                             const VerifyConfig& c);

/// Gaussian and adversarial perturbations satisfying ||A^H n|| <= m delta ||x*||
/// change the fixed point by at most ||A^H n|| / m_cert.
SuiteResult robustness_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                             const VerifyConfig& c);

/// Q = mI: ||Delta|| / (||A^H n|| / m) within 1% of 1.
SuiteResult robustness_linear(const VerifyConfig& c);

/// Implicit gradients of both solvers against 200 unrolled steps, relative error < 1e-5.
SuiteResult implicit_gradient(const VerifyConfig& c);

/// choose_delta equals the recomputed max ratio to 1e-12; samples in
/// `held_out` (if given) lie inside the selected ball.
SuiteResult delta_selection(const std::vector<train::TrainSample>& data, double mu,
                            const std::vector<train::TrainSample>* held_out = nullptr);

/// Bit-exact container round trips and distinct error kinds.
SuiteResult container_roundtrip(const VerifyConfig& c);

/// <A x, y> = <x, A^H y>, network gradient vs central differences and the
/// spectral-normalization bound.
SuiteResult operator_checks(const VerifyConfig& c);

/// Certified modulus 1 - L of the combined operator of `model` on the ball
/// of relative radius `delta` around `x_star`.
double certified_modulus(const train::TrainedModel& model, const mri::MeasurementModel& mm, const Tensor& x_star,
                         double delta, int steps, std::uint64_t seed);

/// Every suite, with an untrained steepest-descent model on a generated
/// dataset standing in for the model suites.
std::vector<SuiteResult> run_all(const VerifyConfig& c, const Logger& log = {});

}  // namespace mnm::verify
