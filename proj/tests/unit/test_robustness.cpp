// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "io/metrics.hpp"
#include "lipschitz/lipschitz.hpp"
#include "mri/generators.hpp"
#include "operators/combined.hpp"
#include "robustness/robustness.hpp"
#include "support.hpp"

using namespace mnm;
using mnm::test::random_tensor;

namespace {

DeqModel linear_model(const mri::MeasurementModel& mm, double beta, double lambda) {
  DeqModel d;
  d.solver = SolverKind::steepest_descent;
  d.score = ops::LinearScore{beta, lambda, mm};
  d.lambda = lambda;
  d.cfg.gamma = 1.0 / lambda;
  d.cfg.lambda = lambda;
  d.cfg.tol = 1e-14;
  d.cfg.max_iter = 20000;
  d.cfg.backward_tol = 1e-14;
  d.cfg.backward_max_iter = 20000;
  return d;
}

mri::MeasurementModel small_multicoil(std::size_t n, std::uint64_t seed) {
  return mri::MeasurementModel(test::random_mask(n, n, 0.4, seed), mri::generate_coil_maps(2, n, n, seed + 1));
}

robust::CleanSolve clean_for(const DeqModel& model, const mri::MeasurementModel& mm, std::uint64_t seed) {
  const Tensor x_ref = random_tensor(mm.image_shape(), seed);
  const mri::KSpaceData b = mri::apply_A(x_ref, mm);
  return robust::CleanSolve::solve(model, mm, b, x_ref, Tensor(mm.image_shape()));
}

double top_singular_value_AH(const mri::MeasurementModel& mm) {
  const Eigen::MatrixXd ah = test::materialize(
      [&](const Tensor& n) { return mri::apply_AH(mri::bind_kspace(n, mm), mm); }, mm.kspace_shape());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(ah);
  return svd.singularValues()(0);
}

// SSIM of one window when y = c x: means scale by c, variances by c^2.
double scaled_window_ssim(double mean, double var, double c, double r) {
  const double c1 = (0.01 * r) * (0.01 * r), c2 = (0.03 * r) * (0.03 * r);
  return ((2 * c * mean * mean + c1) * (2 * c * var + c2)) /
         ((mean * mean * (1 + c * c) + c1) * (var * (1 + c * c) + c2));
}

}  // namespace

TEST_CASE("psnr and ssim trivial values") {
  Tensor ref({2, 8, 8});
  for (std::size_t i = 0; i < 64; ++i) ref[i] = 0.5 + 0.5 * static_cast<double>(i) / 63.0;
  CHECK(io::psnr(ref, ref) == std::numeric_limits<double>::infinity());
  CHECK(io::ssim(ref, ref) == doctest::Approx(1.0).epsilon(1e-15));
  Tensor x = ref;
  for (std::size_t i = 0; i < 64; ++i) x[i] += 0.1;
  CHECK(io::psnr(x, ref) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(io::psnr(Tensor({2, 8, 4}), ref), ShapeError);
  CHECK_THROWS_AS(io::psnr(ref, Tensor({2, 8, 8})), InvalidArgument);
  CHECK_THROWS_AS(io::ssim(Tensor({2, 4, 4}), Tensor({2, 4, 4})), ShapeError);
}

TEST_CASE("ssim of a half-scaled image matches per-window closed forms") {
  const std::size_t n = 16;
  Tensor ref = random_tensor({2, n, n}, 3);
  const Tensor mag = magnitude(ref);
  const Tensor half = 0.5 * ref;
  double r = 0.0;
  for (double v : mag.values()) r = std::max(r, v);
  double total = 0.0;
  int windows = 0;
  for (std::size_t i = 0; i + 7 <= n; ++i) {
    for (std::size_t j = 0; j + 7 <= n; ++j) {
      std::vector<double> w;
      for (std::size_t p = 0; p < 7; ++p)
        for (std::size_t q = 0; q < 7; ++q) w.push_back(mag[(i + p) * n + j + q]);
      double mean = 0.0;
      for (double v : w) mean += v;
      mean /= 49.0;
      double var = 0.0;
      for (double v : w) var += (v - mean) * (v - mean);
      var /= 49.0;
      total += scaled_window_ssim(mean, var, 0.5, r);
      ++windows;
    }
  }
  CHECK(io::ssim(half, ref) == doctest::Approx(total / windows).epsilon(1e-12));
}

TEST_CASE("zero budget leaves the fixed point unchanged") {
  const mri::MeasurementModel mm = small_multicoil(8, 1);
  const DeqModel model = linear_model(mm, 5.0, 10.0);
  const robust::CleanSolve clean = clean_for(model, mm, 2);
  const robust::PerturbationReport a = robust::adversarial_perturb(clean, 0.0, 0.5, {}, 3);
  CHECK(a.delta_norm == 0.0);
  CHECK(a.psnr_perturbed == a.psnr_clean);
  CHECK(a.bound_satisfied);
  for (const auto& g : robust::gaussian_perturb(clean, 0.0, 0.5, 4, 5)) CHECK(g.delta_norm == 0.0);
}

TEST_CASE("linear Q = mI: adversarial search finds the worst case") {
  const mri::MeasurementModel mm = small_multicoil(8, 11);
  const double lambda = 10.0, beta = 5.0, m = beta / lambda;
  const DeqModel model = linear_model(mm, beta, lambda);
  const robust::CleanSolve clean = clean_for(model, mm, 12);
  const double eps = 0.1;
  const robust::PerturbationReport r = robust::adversarial_perturb(clean, eps, m, {}, 13);
  REQUIRE(r.converged);
  CHECK(norm(r.n_star) <= eps * norm(clean.b.samples) + 1e-9);
  const double worst = top_singular_value_AH(mm) * eps * norm(clean.b.samples) / m;
  CHECK(r.delta_norm >= 0.99 * worst);
  CHECK(r.delta_norm <= worst * (1 + 1e-8));
  CHECK(std::abs(r.delta_norm - r.bound) <= 1e-8 * r.bound);
  REQUIRE(r.trace.size() == 21);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] >= r.trace[k - 1]);
  CHECK(r.trace.back() == doctest::Approx(r.delta_norm * r.delta_norm).epsilon(1e-12));
}

TEST_CASE("linear Q = mI: Gaussian trials are tight and dominated by the adversary") {
  const mri::MeasurementModel mm = small_multicoil(8, 21);
  const double m = 0.5;
  const DeqModel model = linear_model(mm, 5.0, 10.0);
  const robust::CleanSolve clean = clean_for(model, mm, 22);
  const double eps = 0.1;
  const auto trials = robust::gaussian_perturb(clean, eps, m, 10, 23);
  REQUIRE(trials.size() == 10);
  double mean = 0.0;
  for (const auto& t : trials) {
    CHECK(norm(t.n_star) == doctest::Approx(eps * norm(clean.b.samples)).epsilon(1e-12));
    CHECK(std::abs(t.delta_norm - t.bound) <= 1e-8 * t.bound);
    mean += t.delta_norm / 10.0;
  }
  const robust::PerturbationReport adv = robust::adversarial_perturb(clean, eps, m, {}, 24);
  CHECK(mean <= adv.delta_norm);
}

TEST_CASE("adversarial sweep is monotone in the budget") {
  const mri::MeasurementModel mm = small_multicoil(8, 31);
  const DeqModel model = linear_model(mm, 5.0, 10.0);
  const robust::CleanSolve clean = clean_for(model, mm, 32);
  robust::AdversarialOptions opts;
  opts.steps = 3;
  const auto reports = robust::adversarial_sweep(clean, {0.01, 0.02, 0.05, 0.1}, 0.5, opts, 33);
  REQUIRE(reports.size() == 4);
  for (std::size_t i = 1; i < reports.size(); ++i) CHECK(reports[i].delta_norm >= reports[i - 1].delta_norm);
  CHECK_THROWS_AS(robust::adversarial_sweep(clean, {0.1, 0.05}, 0.5, opts, 33), InvalidArgument);
}

TEST_CASE("bound check: trivial, tight footnote construction, and precondition") {
  // Q = (beta / lambda) I = 0.01 I with a full single-coil mask.
  const mri::MeasurementModel mm = mri::MeasurementModel::identity(8, 8);
  const double m = 0.01, delta = 0.2;
  const DeqModel model = linear_model(mm, 0.1, 10.0);
  const robust::CleanSolve clean = clean_for(model, mm, 41);

  const robust::BoundCheck zero = robust::verify_robustness_bound(clean, Tensor(mm.kspace_shape()), m, delta);
  CHECK(zero.applicable);
  CHECK(zero.satisfied);
  CHECK(zero.delta_norm == 0.0);

  Tensor n = random_tensor(mm.kspace_shape(), 42);
  // A is unitary here, so ||A^H n|| = ||n||
  n *= 0.005 * delta * norm(clean.x_star) / norm(n);
  const robust::BoundCheck tight = robust::verify_robustness_bound(clean, n, m, delta);
  REQUIRE(tight.applicable);
  CHECK(tight.satisfied);
  CHECK(tight.aHn_norm == doctest::Approx(0.005 * delta * norm(clean.x_star)).epsilon(1e-12));
  CHECK(std::abs(tight.delta_norm - tight.bound) <= 1e-8 * tight.bound);

  n *= 400.0;  // ||A^H n|| = 2 m delta ||x*||
  const robust::BoundCheck outside = robust::verify_robustness_bound(clean, n, m, delta);
  CHECK(!outside.applicable);
}

TEST_CASE("failed perturbed solves are recorded, not thrown") {
  const mri::MeasurementModel mm = small_multicoil(8, 51);
  const DeqModel model = linear_model(mm, 0.5, 10.0);
  robust::CleanSolve clean = clean_for(model, mm, 52);
  DeqModel capped = model;
  capped.cfg.max_iter = 1;
  clean.model = &capped;
  const robust::PerturbationReport r = robust::adversarial_perturb(clean, 0.1, 0.05, {}, 53);
  CHECK(!r.converged);
  CHECK(!r.bound_satisfied);
  CHECK(std::isinf(r.delta_norm));
  const robust::BoundCheck c = robust::verify_robustness_bound(clean, 1e-6 * r.n_star, 0.05, 0.2);
  CHECK(!c.applicable);
}

TEST_CASE("nonlinear model: bound holds for small perturbations with the certified modulus") {
  const std::size_t n = 16;
  const mri::MeasurementModel mm(mri::generate_vd_mask(n, n, 4, 61), mri::generate_coil_maps(3, n, n, 62));
  ops::NetworkSpec spec;
  spec.channels = {2, 6, 2};
  spec.form = ops::ScoreForm::residual;
  DeqModel model;
  model.score = ops::ScoreNetwork::random(spec, 63);
  model.cfg.tol = 1e-12;
  model.cfg.max_iter = 2000;
  const robust::CleanSolve clean = clean_for(model, mm, 64);
  const double delta = 0.2;

  const ops::CombinedOperator op(model.score, mm, model.lambda);
  const lip::DiffOperator h = [&](ad::Var z) {
    return ops::residual_H(op, z, ops::bind(op, z.graph(), false, false));
  };
  const double L = lip::estimate_local_lipschitz(h, lip::BallSpec{clean.x_star, delta}, 200, 0.1, 65).L;
  REQUIRE(L < 1.0);
  const double m_cert = 1.0 - L;

  int applicable = 0;
  for (int t = 0; t < 20; ++t) {
    Tensor noise = mri::bind_kspace(random_tensor(mm.kspace_shape(), 70 + t), mm).samples;
    const double scale = m_cert * delta * norm(clean.x_star) * (0.05 + 0.04 * t);
    noise *= scale / norm(mri::apply_AH(mri::bind_kspace(noise, mm), mm));
    const robust::BoundCheck c = robust::verify_robustness_bound(clean, noise, m_cert, delta);
    if (!c.applicable) continue;
    ++applicable;
    CAPTURE(t);
    CHECK(c.satisfied);
  }
  CHECK(applicable == 20);
}
