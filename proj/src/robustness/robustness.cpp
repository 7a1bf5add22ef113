// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustness/robustness.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "error.hpp"
#include "io/metrics.hpp"
#include "mri/generators.hpp"

namespace mnm::robust {
namespace {

// Relative slack on the bound comparison, for rounding in tight linear cases.
constexpr double kBoundSlack = 1e-9;

bool is_solver_failure(const Error& e) {
  return e.kind() == ErrorKind::not_converged || e.kind() == ErrorKind::diverged;
}

Tensor random_kspace(const CleanSolve& clean, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor n(clean.b.samples.shape());
  for (double& v : n.values()) v = gauss(rng);
  n = mri::bind_kspace(std::move(n), clean.mm).samples;
  const double nn = norm(n);
  if (nn > 0.0) n *= radius / nn;
  return n;
}

struct PerturbedSolve {
  Tensor aHb;
  Tensor y;
  bool converged = false;
};

PerturbedSolve perturbed_solve(const CleanSolve& clean, const Tensor& aHn) {
  PerturbedSolve p;
  p.aHb = mri::apply_AH(clean.b, clean.mm) + aHn;
  if (squared_norm(aHn) == 0.0) {
    // unchanged data, unchanged fixed point
    p.y = clean.x_star;
    p.converged = true;
    return p;
  }
  try {
    FixedPointResult r = clean.model->solve(clean.mm, p.aHb, clean.x_star);
    p.converged = r.converged;
    p.y = std::move(r.x_star);
  } catch (const Error& e) {
    if (!is_solver_failure(e)) throw;
  }
  return p;
}

PerturbationReport report_for(const CleanSolve& clean, const Tensor& n, double epsilon, double m,
                              const PerturbedSolve& p, const Tensor& aHn) {
  PerturbationReport r;
  r.epsilon = epsilon;
  r.n_star = n;
  r.psnr_clean = io::psnr(clean.x_star, clean.x_ref);
  r.aHn_norm = norm(aHn);
  r.bound = r.aHn_norm / m;
  r.converged = p.converged;
  if (p.converged) {
    r.delta_norm = norm(p.y - clean.x_star);
    r.psnr_perturbed = io::psnr(p.y, clean.x_ref);
    r.bound_satisfied = r.delta_norm <= r.bound * (1.0 + kBoundSlack);
  } else {
    r.delta_norm = std::numeric_limits<double>::infinity();
    r.psnr_perturbed = (p.y.shape() == clean.x_star.shape() && std::isfinite(squared_norm(p.y))) ? io::psnr(p.y, clean.x_ref)
                                                                           : -std::numeric_limits<double>::infinity();
    r.bound_satisfied = false;
  }
  return r;
}

void check_budget(double epsilon, double m) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("perturbation: epsilon must be >= 0");
  if (!(m > 0.0)) throw InvalidArgument("perturbation: m must be > 0");
}

}  // namespace

CleanSolve CleanSolve::solve(const DeqModel& model, const mri::MeasurementModel& mm, const mri::KSpaceData& b,
                             const Tensor& x_ref, const Tensor& x0) {
  const FixedPointResult r = model.solve(mm, mri::apply_AH(b, mm), x0);
  if (!r.converged) {
    throw ConvergenceError("clean solve did not converge in " + std::to_string(r.iterations) + " steps",
                           r.residuals.empty() ? 0.0 : r.residuals.back(), r.residuals);
  }
  return CleanSolve{&model, mm, b, x_ref, r.x_star};
}

PerturbationReport evaluate_perturbation(const CleanSolve& clean, const Tensor& n, double epsilon, double m) {
  check_budget(epsilon, m);
  require_same_shape("evaluate_perturbation", n, clean.b.samples);
  const Tensor aHn = mri::apply_AH(mri::bind_kspace(n, clean.mm), clean.mm);
  return report_for(clean, n, epsilon, m, perturbed_solve(clean, aHn), aHn);
}

PerturbationReport adversarial_perturb(const CleanSolve& clean, double epsilon, double m,
                                       const AdversarialOptions& opts, std::uint64_t seed,
                                       const std::optional<Tensor>& init) {
  check_budget(epsilon, m);
  if (opts.steps < 0) throw InvalidArgument("adversarial_perturb: steps must be >= 0");
  if (!(opts.step_fraction > 0.0)) throw InvalidArgument("adversarial_perturb: step fraction must be > 0");
  const double radius = epsilon * norm(clean.b.samples);
  if (radius == 0.0) {
    PerturbationReport r = evaluate_perturbation(clean, Tensor::zeros_like(clean.b.samples), epsilon, m);
    r.trace.assign(static_cast<std::size_t>(opts.steps) + 1, 0.0);
    return r;
  }

  Tensor n;
  if (init && norm(*init) > 0.0) {
    n = mri::bind_kspace(*init, clean.mm).samples;
    const double nn = norm(n);
    if (nn > radius) n *= radius / nn;
  } else {
    n = random_kspace(clean, radius, mri::derive_seed(seed, 0));
  }

  // Step length as a fraction of the radius: starts at step_fraction, doubles
  // after an increase of U (up to the ball diameter) and halves otherwise,
  // retrying from the best point.
  double frac = opts.step_fraction;
  PerturbationReport best;
  double best_u = -1.0;
  Tensor best_y, best_aHb, best_grad;
  bool have_grad = false;
  std::vector<double> trace;
  for (int k = 0;; ++k) {
    const Tensor aHn = mri::apply_AH(mri::KSpaceData{n, clean.mm.id()}, clean.mm);
    const PerturbedSolve p = perturbed_solve(clean, aHn);
    if (!p.converged) {
      // left the convergence basin: this perturbation is the reported event
      best = report_for(clean, n, epsilon, m, p, aHn);
      trace.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    const double u = squared_norm(p.y - clean.x_star);
    if (u >= best_u) {
      if (k > 0) frac = std::min(2.0 * frac, 2.0);
      best_u = u;
      best = report_for(clean, n, epsilon, m, p, aHn);
      best_y = p.y;
      best_aHb = p.aHb;
      have_grad = false;
    } else {
      frac *= 0.5;
    }
    trace.push_back(best_u);
    if (k == opts.steps) break;

    if (!have_grad) {
      try {
        best_grad = mri::apply_A(clean.model->backward(clean.mm, best_y, best_aHb, 2.0 * (best_y - clean.x_star)).aHb,
                                 clean.mm)
                        .samples;
        have_grad = true;
      } catch (const Error& e) {
        if (!is_solver_failure(e)) throw;
        break;
      }
    }
    const double gn = norm(best_grad);
    if (!(gn > 0.0) || !std::isfinite(gn)) break;
    n = best.n_star;
    n.axpy(frac * radius / gn, best_grad);
    const double nn = norm(n);
    if (nn > radius) n *= radius / nn;
  }
  while (trace.size() < static_cast<std::size_t>(opts.steps) + 1) trace.push_back(trace.back());
  best.trace = std::move(trace);
  return best;
}

std::vector<PerturbationReport> adversarial_sweep(const CleanSolve& clean, const std::vector<double>& eps_list,
                                                  double m, const AdversarialOptions& opts, std::uint64_t seed) {
  std::vector<PerturbationReport> out;
  std::optional<Tensor> warm;
  double prev = -1.0;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] < prev) throw InvalidArgument("adversarial_sweep: budgets must be non-decreasing");
    prev = eps_list[i];
    out.push_back(adversarial_perturb(clean, eps_list[i], m, opts, mri::derive_seed(seed, i), warm));
    if (out.back().converged) warm = out.back().n_star;
  }
  return out;
}

std::vector<PerturbationReport> gaussian_perturb(const CleanSolve& clean, double epsilon, double m, int trials,
                                                 std::uint64_t seed) {
  check_budget(epsilon, m);
  if (trials < 1) throw InvalidArgument("gaussian_perturb: trials must be >= 1");
  const double radius = epsilon * norm(clean.b.samples);
  std::vector<PerturbationReport> out;
  for (int t = 0; t < trials; ++t) {
    const Tensor n = random_kspace(clean, radius, mri::derive_seed(seed, static_cast<std::uint64_t>(t)));
    out.push_back(evaluate_perturbation(clean, n, epsilon, m));
  }
  return out;
}

BoundCheck verify_robustness_bound(const CleanSolve& clean, const Tensor& n, double m_certified, double delta) {
  if (!(m_certified > 0.0)) throw InvalidArgument("verify_robustness_bound: m_certified must be > 0");
  if (!(delta >= 0.0)) throw InvalidArgument("verify_robustness_bound: delta must be >= 0");
  require_same_shape("verify_robustness_bound", n, clean.b.samples);
  const Tensor aHn = mri::apply_AH(mri::bind_kspace(n, clean.mm), clean.mm);
  BoundCheck c;
  c.aHn_norm = norm(aHn);
  c.bound = c.aHn_norm / m_certified;
  if (c.aHn_norm > m_certified * delta * norm(clean.x_star)) return c;
  const PerturbedSolve p = perturbed_solve(clean, aHn);
  if (!p.converged) return c;
  c.applicable = true;
  c.delta_norm = norm(p.y - clean.x_star);
  c.margin = c.bound - c.delta_norm;
  c.satisfied = c.delta_norm <= c.bound * (1.0 + kBoundSlack);
  return c;
}

}  // namespace mnm::robust
