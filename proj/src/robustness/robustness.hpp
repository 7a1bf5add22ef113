// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Measurement perturbations b -> b + n with ||n|| <= eps ||b|| and the
// resulting fixed-point change Delta = x*(b + n) - x*(b). For an m-monotone
// Q the change obeys ||Delta|| <= ||A^H n|| / m.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fixed_point/deq_model.hpp"
#include "mri/measurement.hpp"

namespace mnm::robust {

/// The clean problem a perturbation is applied to.
struct CleanSolve {
  const DeqModel* model = nullptr;
  mri::MeasurementModel mm;
  mri::KSpaceData b;
  Tensor x_ref;   // ground truth, for PSNR
  Tensor x_star;  // x*(b); perturbed solves start here

  /// Solves for x*(b) from `x0`; throws if the clean solve does not converge.
  static CleanSolve solve(const DeqModel& model, const mri::MeasurementModel& mm, const mri::KSpaceData& b,
                          const Tensor& x_ref, const Tensor& x0);
};

struct PerturbationReport {
  double epsilon = 0.0;
  Tensor n_star;  // k-space perturbation, shape of b.samples
  double psnr_clean = 0.0;
  double psnr_perturbed = 0.0;
  double delta_norm = 0.0;  // ||y* - x*||; +inf if the perturbed solve failed
  double aHn_norm = 0.0;    // ||A^H n||
  double bound = 0.0;       // ||A^H n|| / m
  bool converged = true;    // perturbed solve converged
  bool bound_satisfied = true;
  std::vector<double> trace;  // best-so-far U = ||Delta||^2 per evaluation (adversarial only)
};

struct AdversarialOptions {
  int steps = 20;
  double step_fraction = 0.1;  // step length as a fraction of eps ||b||
};

/// Projected gradient ascent on U(n) = ||x*(b + n) - x*(b)||^2 over
/// ||n|| <= eps ||b||. Starts from `init` (rescaled into the ball) or a
/// seeded random direction. A failed perturbed solve ends the search and is
/// reported with converged = false and bound_satisfied = false.
PerturbationReport adversarial_perturb(const CleanSolve& clean, double epsilon, double m,
                                       const AdversarialOptions& opts, std::uint64_t seed,
                                       const std::optional<Tensor>& init = std::nullopt);

/// Adversarial reports for an increasing list of budgets, each search warm
/// started from the previous best perturbation.
std::vector<PerturbationReport> adversarial_sweep(const CleanSolve& clean, const std::vector<double>& eps_list,
                                                  double m, const AdversarialOptions& opts, std::uint64_t seed);

/// Circular Gaussian perturbations on the sampled locations, rescaled to
/// ||n|| = eps ||b||.
std::vector<PerturbationReport> gaussian_perturb(const CleanSolve& clean, double epsilon, double m, int trials,
                                                 std::uint64_t seed);

/// Evaluates an explicit perturbation.
PerturbationReport evaluate_perturbation(const CleanSolve& clean, const Tensor& n, double epsilon, double m);

struct BoundCheck {
  bool applicable = false;  // ||A^H n|| <= m delta ||x*|| and the perturbed solve converged
  bool satisfied = false;
  double delta_norm = 0.0;
  double aHn_norm = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - delta_norm
};

/// Checks ||Delta|| <= ||A^H n|| / m_certified for a relative ball radius
/// `delta`. Not applicable when the precondition fails or the solve fails.
BoundCheck verify_robustness_bound(const CleanSolve& clean, const Tensor& n, double m_certified, double delta);

}  // namespace mnm::robust
