// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "verify/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>

#include "diffgraph/ops.hpp"
#include "error.hpp"
#include "fixed_point/solvers.hpp"
#include "io/array_io.hpp"
#include "io/dataset.hpp"
#include "lipschitz/lipschitz.hpp"
#include "mri/generators.hpp"
#include "mri/sense.hpp"
#include "operators/combined.hpp"
#include "operators/spectral.hpp"
#include "robustness/robustness.hpp"

namespace mnm::verify {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

template <class F>
SuiteResult timed(const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = body();
  } catch (const Error& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Tensor gaussian(const Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t(shape);
  for (double& v : t.values()) v = g(rng);
  return t;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform radius along a Gaussian direction, so starts cover the ball from
/// center to boundary.
Tensor point_in_ball(const lip::BallSpec& ball, std::mt19937_64& rng) {
  const Tensor d = gaussian(ball.center.shape(), rng);
  Tensor z = ball.center;
  z.axpy(ball.radius() * uniform(rng, 0.0, 1.0) / norm(d), d);
  return z;
}

mri::MeasurementModel synthetic_model(std::size_t n, std::uint64_t seed) {
  return mri::MeasurementModel(mri::generate_vd_mask(n, n, 4.0, mri::derive_seed(seed, 0)),
                               mri::generate_coil_maps(3, n, n, mri::derive_seed(seed, 1)));
}

lip::DiffOperator residual_of(const ops::CombinedOperator& op) {
  return [op](ad::Var z) { return ops::residual_H(op, z, ops::bind(op, z.graph(), false, false)); };
}

DeqModel tightened(const DeqModel& d, double tol) {
  DeqModel t = d;
  t.cfg.tol = tol;
  t.cfg.max_iter = 20000;
  t.cfg.backward_tol = tol;
  t.cfg.backward_max_iter = 20000;
  return t;
}

DeqModel linear_model(const mri::MeasurementModel& mm, double beta, double lambda) {
  DeqModel d;
  d.solver = SolverKind::steepest_descent;
  d.score = ops::LinearScore{beta, lambda, mm};
  d.lambda = lambda;
  d.cfg.gamma = 1.0 / lambda;
  d.cfg.lambda = lambda;
  return tightened(d, 1e-14);
}

Tensor solve_or_throw(const DeqModel& d, const mri::MeasurementModel& mm, const Tensor& aHb, const Tensor& x0) {
  const FixedPointResult r = d.solve(mm, aHb, x0);
  if (!r.converged) {
    throw ConvergenceError("fixed point did not converge in " + std::to_string(r.iterations) + " steps",
                           r.residuals.empty() ? 0.0 : r.residuals.back(), r.residuals);
  }
  return r.x_star;
}

double model_delta(const train::TrainedModel& model, const VerifyConfig& c) {
  return model.delta > 0.0 ? model.delta : c.delta;
}

Tensor flat(const std::vector<Tensor>& ts) {
  std::vector<double> v;
  for (const Tensor& t : ts) v.insert(v.end(), t.values().begin(), t.values().end());
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

double rel_err(const Tensor& a, const Tensor& b) { return norm(a - b) / std::max(norm(b), 1e-300); }

DeqGradients unrolled(const StepGraphFn& step, const std::function<ops::OperatorBinding(ad::Graph&)>& bind,
                      const Tensor& x0, const Tensor& aHb, const Tensor& c, int steps) {
  ad::Graph g;
  const ops::OperatorBinding b = bind(g);
  ad::Var rhs = g.leaf(aHb);
  ad::Var x = g.constant(x0);
  for (int k = 0; k < steps; ++k) x = step(x, b, rhs);
  ad::Var loss = ad::inner(x, g.constant(c));
  std::vector<ad::Var> leaves = b.params;
  leaves.push_back(b.lambda);
  leaves.push_back(rhs);
  std::vector<Tensor> grads = g.grad(loss, leaves);
  DeqGradients out;
  out.aHb = grads.back();
  grads.pop_back();
  out.lambda = grads.back().item();
  grads.pop_back();
  out.params = std::move(grads);
  return out;
}

double gradient_error(const DeqGradients& implicit, const DeqGradients& oracle) {
  const double lam = std::abs(implicit.lambda - oracle.lambda) / std::max(std::abs(oracle.lambda), 1e-300);
  return std::max({rel_err(flat(implicit.params), flat(oracle.params)), lam, rel_err(implicit.aHb, oracle.aHb)});
}

}  // namespace

double certified_modulus(const train::TrainedModel& model, const mri::MeasurementModel& mm, const Tensor& x_star,
                         double delta, int steps, std::uint64_t seed) {
  const ops::CombinedOperator op(model.deq.score, mm, model.deq.lambda);
  const lip::BallSpec ball{x_star, delta};
  return 1.0 - lip::estimate_local_lipschitz(residual_of(op), ball, steps, 0.1, seed).L;
}

SuiteResult lemma_monotone(const VerifyConfig& c) {
  return timed("lipschitz-implies-monotone", [&] {
    const std::size_t n = c.image_size;
    int pairs = 0, certified_configs = 0;
    double min_slack = kInf, min_margin = kInf, max_L = 0.0;
    for (int i = 0; i < c.lemma_configs; ++i) {
      const std::uint64_t seed = mri::derive_seed(c.seed, 0x1000 + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(seed);
      const mri::MeasurementModel mm = synthetic_model(n, seed);
      const double lambda = i % 2 == 0 ? 10.0 : 2.0;
      ops::Score score;
      if (i % 4 == 0) {
        score = ops::LinearScore{lambda * uniform(rng, 0.05, 0.9), lambda, mm};
      } else {
        ops::NetworkSpec spec;
        spec.channels = {2, 8, 2};
        spec.form = ops::ScoreForm::residual;
        spec.output_scale = uniform(rng, 0.05, 0.35);
        score = ops::ScoreNetwork::random(spec, mri::derive_seed(seed, 2));
      }
      const ops::CombinedOperator op(score, mm, lambda);
      const lip::BallSpec ball{mri::generate_phantom(n, n, mri::derive_seed(seed, 3)), c.delta};
      const auto h = [&op](const Tensor& z) { return ops::residual_H(op, z); };
      const lip::LipschitzEstimate est =
          lip::estimate_local_lipschitz(residual_of(op), ball, 30, 0.1, mri::derive_seed(seed, 4));

      std::vector<std::pair<double, double>> rq;  // (H-ratio, monotonicity quotient)
      rq.emplace_back(lip::lipschitz_ratio(h, est.z1, est.z2), ops::monotonicity_probe(op, est.z1, est.z2));
      while (static_cast<int>(rq.size()) <= c.pairs_per_config) {
        const Tensor z1 = point_in_ball(ball, rng);
        Tensor z2 = z1;
        const Tensor d = gaussian(z1.shape(), rng);
        z2.axpy(ball.radius() * std::pow(10.0, -3.0 * uniform(rng, 0.0, 1.0)) / norm(d), d);
        z2 = lip::project_ball(z2, ball);
        if (norm(z2 - z1) < 1e-6 * ball.radius()) continue;
        rq.emplace_back(lip::lipschitz_ratio(h, z1, z2), ops::monotonicity_probe(op, z1, z2));
      }
      double L = est.L;
      for (const auto& [r, q] : rq) {
        L = std::max(L, r);
        min_slack = std::min(min_slack, q - (1.0 - r));
      }
      max_L = std::max(max_L, L);
      pairs += static_cast<int>(rq.size());
      if (L < 1.0) {
        ++certified_configs;
        for (const auto& [r, q] : rq) min_margin = std::min(min_margin, q - (1.0 - L));
      }
    }
    SuiteResult r;
    r.passed = c.lemma_configs > 0 && certified_configs == c.lemma_configs && min_slack >= -1e-9 &&
               min_margin >= -1e-9;
    r.detail = format("%d configs (%d with L < 1, max L %.4f), %d pairs; min q-(1-r) %.3e, min q-m %.3e",
                      c.lemma_configs, certified_configs, max_L, pairs, min_slack, min_margin);
    return r;
  });
}

SuiteResult convergence_linear(const VerifyConfig& c) {
  return timed("convergence-rate-linear", [&] {
    const std::size_t n = c.image_size;
    const double lambda = 10.0;
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 2; ++i) {
      const std::uint64_t seed = mri::derive_seed(c.seed, 0x2000 + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(seed);
      const mri::MeasurementModel mm = synthetic_model(n, seed);
      const Tensor aHb = gaussian(mm.image_shape(), rng);
      const Tensor start = gaussian(mm.image_shape(), rng);
      for (double beta : {0.5, 2.0}) {
        const double m = beta / lambda;
        const ops::CombinedOperator op(ops::LinearScore{beta, lambda, mm}, mm, lambda);
        const Tensor x_star = (1.0 / m) * aHb;
        const Tensor x0 = x_star + start;
        for (double gamma : {0.05, 0.1}) {
          SolverConfig cfg;
          cfg.gamma = gamma;
          cfg.lambda = lambda;
          cfg.tol = 1e-300;
          const double q = 1.0 - gamma * lambda * m;
          for (int k = 1; k <= 30; ++k) {
            cfg.max_iter = k;
            const Tensor xk = steepest_descent_fp_aHb(op, aHb, x0, cfg).x_star;
            const double want = norm(x0 - x_star) * std::pow(q, k);
            worst = std::max(worst, std::abs(norm(xk - x_star) - want) / want);
            ++checked;
          }
        }
      }
    }
    SuiteResult r;
    r.passed = worst <= 1e-10;
    r.detail = format("%d iterates, max relative deviation from (1-gamma lambda m)^k: %.3e", checked, worst);
    return r;
  });
}

SuiteResult convergence_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                              const VerifyConfig& c) {
  return timed("convergence-rate-model", [&] {
    SuiteResult r;
    if (model.deq.solver != SolverKind::steepest_descent) {
      r.detail = "model does not use steepest descent";
      return r;
    }
    const double delta = model_delta(model, c);
    const double rho = model.deq.synced_config().step();
    const DeqModel tight = tightened(model.deq, 1e-12);
    double worst = -kInf, m_lo = kInf, m_hi = -kInf;
    int checked = 0;
    bool certified = true;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const train::TrainSample& s = data[k];
      const Tensor aHb = mri::apply_AH(s.b, s.mm);
      const Tensor x0 = mri::sense_init(s.b, s.mm);
      const Tensor x_star = solve_or_throw(tight, s.mm, aHb, x0);
      const double m_cert = certified_modulus(model, s.mm, x_star, delta, c.certify_steps,
                                              mri::derive_seed(c.seed, 0x3000 + k));
      m_lo = std::min(m_lo, m_cert);
      m_hi = std::max(m_hi, m_cert);
      if (m_cert <= 0.0) {
        certified = false;
        continue;
      }
      const double rate = 1.0 - rho * m_cert;
      const double radius = delta * norm(x_star);
      Tensor x = x0;
      for (int it = 0; it < tight.cfg.max_iter; ++it) {
        const double dist = norm(x - x_star);
        if (dist <= 1e-6 * norm(x_star)) break;
        Tensor next = model.deq.step(s.mm, aHb, x);
        if (dist <= radius) {
          worst = std::max(worst, norm(next - x_star) / dist - rate);
          ++checked;
        }
        x = std::move(next);
      }
    }
    r.passed = certified && checked > 0 && worst <= 1e-3;
    r.detail = format("%zu models, m_cert in [%.4f, %.4f], %d steps in the ball, max ratio - (1-gamma lambda m) %.3e",
                      data.size(), m_lo, m_hi, checked, worst);
    return r;
  });
}

SuiteResult local_uniqueness(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                             const VerifyConfig& c) {
  return timed("local-uniqueness", [&] {
    const double delta = model_delta(model, c);
    const double tol = model.deq.cfg.tol;
    // a stopped iterate is up to tol q / (1 - q) from its limit, so the
    // starts are solved to tol / 100 before comparing at 10 tol
    const DeqModel tight = tightened(model.deq, tol / 100.0);
    double worst = 0.0;
    int solves = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const train::TrainSample& s = data[k];
      std::mt19937_64 rng(mri::derive_seed(c.seed, 0x4000 + k));
      const Tensor aHb = mri::apply_AH(s.b, s.mm);
      const Tensor x_star = solve_or_throw(tight, s.mm, aHb, mri::sense_init(s.b, s.mm));
      const lip::BallSpec ball{x_star, delta};
      std::vector<Tensor> fps;
      for (int i = 0; i < c.uniqueness_inits; ++i) {
        fps.push_back(solve_or_throw(tight, s.mm, aHb, point_in_ball(ball, rng)));
        ++solves;
      }
      for (std::size_t i = 0; i < fps.size(); ++i) {
        for (std::size_t j = i + 1; j < fps.size(); ++j) {
          worst = std::max(worst, norm(fps[i] - fps[j]) / norm(x_star));
        }
      }
    }
    SuiteResult r;
    r.passed = solves > 0 && worst <= 10.0 * tol;
    r.detail = format("%d starts over %zu models, max pairwise ||xi-xj||/||x*|| %.3e (limit %.1e)", solves,
                      data.size(), worst, 10.0 * tol);
    return r;
  });
}

SuiteResult robustness_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                             const VerifyConfig& c) {
  return timed("robustness-bound-model", [&] {
    SuiteResult r;
    if (data.empty()) {
      r.detail = "no samples";
      return r;
    }
    const double delta = model_delta(model, c);
    const DeqModel tight = tightened(model.deq, 1e-10);
    std::vector<robust::CleanSolve> clean;
    std::vector<double> m_cert;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const train::TrainSample& s = data[k];
      clean.push_back(robust::CleanSolve::solve(tight, s.mm, s.b, s.x_ref, mri::sense_init(s.b, s.mm)));
      m_cert.push_back(certified_modulus(model, s.mm, clean.back().x_star, delta, c.certify_steps,
                                         mri::derive_seed(c.seed, 0x3000 + k)));
      if (m_cert.back() <= 0.0) {
        r.detail = format("sample %zu not certified (m_cert %.4f)", k, m_cert.back());
        return r;
      }
    }
    int applicable = 0, satisfied = 0;
    double min_margin = kInf;
    for (int t = 0; t < c.robustness_trials; ++t) {
      const std::size_t k = static_cast<std::size_t>(t) % clean.size();
      const robust::CleanSolve& cs = clean[k];
      const std::uint64_t seed = mri::derive_seed(c.seed, 0x5000 + static_cast<std::uint64_t>(t));
      const double u = 0.05 + 0.9 * (t + 0.5) / c.robustness_trials;
      const double target = u * m_cert[k] * delta * norm(cs.x_star);
      Tensor n;
      if (t % 2 == 0) {
        std::mt19937_64 rng(seed);
        n = mri::bind_kspace(gaussian(cs.mm.kspace_shape(), rng), cs.mm).samples;
        n *= target / norm(mri::apply_AH(mri::bind_kspace(n, cs.mm), cs.mm));
      } else {
        // ||A^H n|| <= ||n|| = eps ||b|| = target since ||A|| <= 1
        robust::AdversarialOptions opts;
        opts.steps = 5;
        n = robust::adversarial_perturb(cs, target / norm(cs.b.samples), m_cert[k], opts, seed).n_star;
      }
      const robust::BoundCheck bc = robust::verify_robustness_bound(cs, n, m_cert[k], delta);
      if (!bc.applicable) continue;
      ++applicable;
      if (bc.satisfied) ++satisfied;
      min_margin = std::min(min_margin, bc.margin / bc.bound);
    }
    r.passed = applicable > 0 && satisfied == applicable;
    r.detail = format("%d/%d applicable trials satisfy ||Delta|| <= ||A^H n||/m_cert (%d trials), min relative margin %.3e",
                      satisfied, applicable, c.robustness_trials, min_margin);
    return r;
  });
}

SuiteResult robustness_linear(const VerifyConfig& c) {
  return timed("robustness-bound-linear", [&] {
    const std::size_t n = c.image_size;
    const std::uint64_t seed = mri::derive_seed(c.seed, 0x6000);
    const mri::MeasurementModel mm = synthetic_model(n, seed);
    const double lambda = 10.0, beta = 2.0, m = beta / lambda;
    const DeqModel model = linear_model(mm, beta, lambda);
    const Tensor x_ref = mri::generate_phantom(n, n, mri::derive_seed(seed, 5));
    const mri::KSpaceData b = mri::apply_A(x_ref, mm);
    const robust::CleanSolve clean = robust::CleanSolve::solve(model, mm, b, x_ref, Tensor(mm.image_shape()));
    std::vector<robust::PerturbationReport> reps = robust::gaussian_perturb(clean, 0.05, m, 10, seed);
    reps.push_back(robust::adversarial_perturb(clean, 0.05, m, {}, seed));
    double lo = kInf, hi = 0.0;
    for (const auto& rep : reps) {
      const double ratio = rep.delta_norm / rep.bound;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    SuiteResult r;
    r.passed = lo >= 0.99 && hi <= 1.0 + 1e-9;
    r.detail = format("Q = %.2f I: ||Delta|| / (||A^H n||/m) in [%.6f, %.6f] over %zu perturbations", m, lo, hi,
                      reps.size());
    return r;
  });
}

SuiteResult implicit_gradient(const VerifyConfig& c) {
  return timed("implicit-gradient", [&] {
    const std::size_t n = c.image_size;
    const std::uint64_t seed = mri::derive_seed(c.seed, 0x7000);
    std::mt19937_64 rng(seed);
    const mri::MeasurementModel mm = synthetic_model(n, seed);
    const double lambda = 2.0;
    ops::NetworkSpec spec;
    spec.channels = {2, 6, 2};
    spec.form = ops::ScoreForm::residual;
    const ops::Score f = ops::ScoreNetwork::random(spec, mri::derive_seed(seed, 2));
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = lambda;
    cfg.tol = 1e-14;
    cfg.max_iter = 2000;
    cfg.backward_tol = 1e-13;
    cfg.backward_max_iter = 2000;
    cfg.inner_tol = 1e-14;
    cfg.inner_max_iter = 500;
    const Tensor aHb = mri::apply_AHA(mri::generate_phantom(n, n, mri::derive_seed(seed, 3)), mm);
    const Tensor cot = gaussian(mm.image_shape(), rng);

    const ops::CombinedOperator op(f, mm, lambda);
    const Tensor xs_sd = steepest_descent_fp_aHb(op, aHb, aHb, cfg).x_star;
    const double err_sd = gradient_error(
        deq_backward(op, xs_sd, aHb, cot, cfg),
        unrolled([&](ad::Var x, const ops::OperatorBinding& b,
                     ad::Var rhs) { return steepest_descent_step(op, x, b, rhs, cfg.step()); },
                 [&](ad::Graph& g) { return ops::bind(op, g, true, true); }, aHb, aHb, cot, 200));

    const Tensor xs_fb = forward_backward_fp_aHb(f, mm, aHb, aHb, cfg).x_star;
    const double err_fb = gradient_error(
        deq_backward_fb(f, mm, lambda, xs_fb, aHb, cot, cfg),
        unrolled([&](ad::Var x, const ops::OperatorBinding& b,
                     ad::Var rhs) { return forward_backward_step(f, mm, x, b, rhs, cfg); },
                 [&](ad::Graph& g) {
                   return ops::OperatorBinding{ops::bind_parameters(f, g, true), g.leaf(Tensor::scalar(lambda))};
                 },
                 aHb, aHb, cot, 200));
    SuiteResult r;
    r.passed = err_sd < 1e-5 && err_fb < 1e-5;
    r.detail = format("relative error vs 200 unrolled steps: steepest descent %.3e, forward-backward %.3e", err_sd,
                      err_fb);
    return r;
  });
}

SuiteResult delta_selection(const std::vector<train::TrainSample>& data, double mu,
                            const std::vector<train::TrainSample>* held_out) {
  return timed("delta-selection", [&] {
    const double delta = train::choose_delta(data, mu);
    mri::SenseOptions opts;
    opts.mu = mu;
    double max_ratio = 0.0;
    for (const train::TrainSample& s : data) {
      const Tensor x_ls = mri::sense_init(s.b, s.mm, opts);
      max_ratio = std::max(max_ratio, norm(x_ls - s.x_ref) / norm(s.x_ref));
    }
    const double diff = std::abs(delta - max_ratio);
    SuiteResult r;
    r.passed = diff <= 1e-12;
    r.detail = format("delta %.12f over %zu samples, |delta - recomputed max| %.3e", delta, data.size(), diff);
    if (held_out) {
      std::size_t inside = 0;
      double worst = 0.0;
      for (const train::TrainSample& s : *held_out) {
        const double ratio = norm(mri::sense_init(s.b, s.mm, opts) - s.x_ref) / norm(s.x_ref);
        worst = std::max(worst, ratio);
        if (ratio <= delta) ++inside;
      }
      r.passed = r.passed && inside == held_out->size();
      r.detail += format("; %zu/%zu held-out SENSE starts inside the ball (max ratio %.6f)", inside, held_out->size(),
                         worst);
    }
    return r;
  });
}

SuiteResult container_roundtrip(const VerifyConfig& c) {
  return timed("container-roundtrip", [&] {
    std::mt19937_64 rng(mri::derive_seed(c.seed, 0x8000));
    int exact = 0, total = 0;
    for (const Shape& shape : std::vector<Shape>{{}, {7}, {2, 3, 4}, {3, 2, c.image_size, c.image_size}}) {
      Tensor t = gaussian(shape, rng);
      if (t.size() >= 3) {
        t[0] = -0.0;
        t[1] = std::numeric_limits<double>::denorm_min();
        t[2] = std::numeric_limits<double>::max();
      }
      const Tensor u = io::decode_array(io::encode_array(t));
      ++total;
      if (u.shape() == t.shape() && std::memcmp(u.data(), t.data(), 8 * t.size()) == 0) ++exact;
    }
    const std::string good = io::encode_array(gaussian({2, 3}, rng));
    const auto kind_of = [](const std::string& bytes) -> int {
      try {
        io::decode_array(bytes);
      } catch (const FormatError& e) {
        return static_cast<int>(e.detail());
      }
      return -1;
    };
    std::string bad_magic = good, bad_dtype = good;
    bad_magic[0] = 'X';
    bad_dtype[4] = 9;
    const bool kinds = kind_of(bad_magic) == static_cast<int>(FormatErrorKind::bad_magic) &&
                       kind_of(good.substr(0, good.size() - 3)) == static_cast<int>(FormatErrorKind::truncated) &&
                       kind_of(bad_dtype) == static_cast<int>(FormatErrorKind::unknown_dtype) &&
                       kind_of(good + '\0') == static_cast<int>(FormatErrorKind::malformed);
    SuiteResult r;
    r.passed = exact == total && kinds;
    r.detail = format("%d/%d arrays bit-exact; error kinds %s", exact, total, kinds ? "distinct" : "WRONG");
    return r;
  });
}

SuiteResult operator_checks(const VerifyConfig& c) {
  return timed("operator-checks", [&] {
    const std::size_t n = c.image_size;
    const std::uint64_t seed = mri::derive_seed(c.seed, 0x9000);
    std::mt19937_64 rng(seed);
    const mri::MeasurementModel mm = synthetic_model(n, seed);

    double adj = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Tensor x = gaussian(mm.image_shape(), rng);
      const mri::KSpaceData y = mri::bind_kspace(gaussian(mm.kspace_shape(), rng), mm);
      const double lhs = dot(mri::apply_A(x, mm).samples, y.samples);
      const double rhs = dot(x, mri::apply_AH(y, mm));
      adj = std::max(adj, std::abs(lhs - rhs) / (norm(x) * norm(y.samples)));
    }

    ops::NetworkSpec spec;
    spec.channels = {2, 4, 2};
    spec.form = ops::ScoreForm::residual;
    spec.output_scale = 1.0;
    const ops::ScoreNetwork net = ops::ScoreNetwork::random(spec, mri::derive_seed(seed, 2));
    const Tensor x0 = gaussian({2, 8, 8}, rng), cot = gaussian({2, 8, 8}, rng);
    ad::Graph g;
    const std::vector<ad::Var> params = net.bind(g, true);
    const ad::Var out = ad::inner(net.apply(g.constant(x0), params), g.constant(cot));
    const Tensor analytic = flat(g.grad(out, params));
    const std::vector<double> theta = net.theta();
    double fd_err = 0.0;
    const double h = 1e-6;
    for (std::size_t p = 0; p < theta.size(); p += 3) {
      const auto value = [&](double shift) {
        ops::ScoreNetwork copy = net;
        std::vector<double> t = theta;
        t[p] += shift;
        copy.set_theta(t);
        return dot(copy.apply(x0), cot);
      };
      const double fd = (value(h) - value(-h)) / (2 * h);
      fd_err = std::max(fd_err, std::abs(fd - analytic[p]) / std::max(1.0, std::abs(analytic[p])));
    }

    spec.channels = {2, 8, 8, 2};
    const double target = 0.5;
    const ops::ScoreNetwork sn =
        ops::spectral_normalize(ops::ScoreNetwork::random(spec, mri::derive_seed(seed, 3)), target, n, n);
    const double product = ops::layer_norm_product(sn, n, n);

    SuiteResult r;
    r.passed = adj <= 1e-12 && fd_err <= 1e-6 && product <= target * (1.0 + 1e-6);
    r.detail = format("adjoint mismatch %.3e, network gradient vs FD %.3e, normalized layer product %.6f (target %.2f)",
                      adj, fd_err, product, target);
    return r;
  });
}

std::vector<SuiteResult> run_all(const VerifyConfig& c, const Logger& log) {
  std::vector<SuiteResult> out;
  const auto add = [&](SuiteResult r) {
    if (log) log(format("[%s] %s (%.1f s): ", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds) + r.detail);
    out.push_back(std::move(r));
  };
  add(lemma_monotone(c));
  add(convergence_linear(c));
  add(implicit_gradient(c));
  add(robustness_linear(c));
  add(container_roundtrip(c));
  add(operator_checks(c));

  io::DatasetSpec data_spec;
  data_spec.height = data_spec.width = c.image_size;
  data_spec.count = 4;
  data_spec.seed = mri::derive_seed(c.seed, 0xa000);
  const std::vector<train::TrainSample> data = io::generate_dataset(data_spec);
  train::TrainedModel model;
  model.variant = train::Variant::mnm_mol;
  model.delta = c.delta;
  model.deq.solver = SolverKind::steepest_descent;
  ops::NetworkSpec spec;
  spec.channels = {2, 8, 2};
  spec.form = ops::ScoreForm::residual;
  model.deq.score = ops::ScoreNetwork::random(spec, mri::derive_seed(c.seed, 0xa001));
  model.deq.cfg = train::TrainConfig::training_solver();
  add(convergence_model(model, data, c));
  add(local_uniqueness(model, data, c));
  add(robustness_model(model, data, c));
  add(delta_selection(data, mri::SenseOptions{}.mu));
  return out;
}

}  // namespace mnm::verify
