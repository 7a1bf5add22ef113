// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "lipschitz/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "diffgraph/ops.hpp"
#include "error.hpp"

namespace mnm::lip {
namespace {

constexpr int kMaxHalvings = 30;
constexpr int kMaxCollisions = 5;

Tensor random_direction(const Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor d(shape);
  for (double& v : d.values()) v = gauss(rng);
  const double n = norm(d);
  d *= 1.0 / n;
  return d;
}

struct Evaluation {
  double ratio2 = 0.0;
  Tensor g1, g2;
};

// Squared ratio and, if requested, its gradient with respect to z1 and z2.
Evaluation evaluate(const DiffOperator& h, const Tensor& z1, const Tensor& z2, bool with_grad) {
  ad::Graph g;
  ad::Var a = g.leaf(z1, with_grad);
  ad::Var b = g.leaf(z2, with_grad);
  ad::Var dh = ad::sub(h(b), h(a));
  ad::Var dz = ad::sub(b, a);
  ad::Var r2 = ad::div(ad::inner(dh, dh), ad::inner(dz, dz));
  Evaluation e;
  e.ratio2 = r2.value().item();
  if (with_grad) {
    const ad::Var leaves[] = {a, b};
    auto grads = g.grad(r2, leaves);
    e.g1 = std::move(grads[0]);
    e.g2 = std::move(grads[1]);
  }
  return e;
}

}  // namespace

double BallSpec::radius() const { return relative ? delta * norm(center) : delta; }

Tensor project_ball(const Tensor& z, const BallSpec& ball) {
  require_same_shape("project_ball", z, ball.center);
  const double r = ball.radius();
  Tensor d = z - ball.center;
  const double n = norm(d);
  // the slack keeps projection idempotent under rounding
  if (n <= r * (1.0 + 1e-12)) return z;
  d *= r / n;
  return ball.center + d;
}

LipschitzEstimate estimate_local_lipschitz(const DiffOperator& h, const BallSpec& ball, int steps, double step_size,
                                           std::uint64_t seed) {
  if (steps < 1) throw InvalidArgument("estimate_local_lipschitz: steps must be >= 1");
  if (!(ball.delta > 0.0)) throw InvalidArgument("estimate_local_lipschitz: delta must be > 0");
  const double radius = ball.radius();
  if (!(radius > 0.0)) throw InvalidArgument("estimate_local_lipschitz: ball has zero radius");
  if (!(step_size > 0.0)) throw InvalidArgument("estimate_local_lipschitz: step size must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Shape& shape = ball.center.shape();
  auto start = [&] {
    Tensor z = ball.center;
    z.axpy(radius * (0.2 + 0.8 * uni(rng)), random_direction(shape, rng));
    return project_ball(z, ball);
  };
  Tensor z1 = start();
  Tensor z2 = start();

  // Closer pairs make the ratio a difference quotient dominated by rounding.
  const double min_sep = 1e-6 * radius;
  int collisions = 0;
  auto separate = [&](Tensor& moving, const Tensor& fixed) {
    while (norm(moving - fixed) <= min_sep) {
      if (++collisions > kMaxCollisions) {
        throw InvalidArgument("estimate_local_lipschitz: ascent points collided more than 5 times");
      }
      moving.axpy(radius / 100.0, random_direction(shape, rng));
      moving = project_ball(moving, ball);
    }
  };
  separate(z2, z1);

  LipschitzEstimate est;
  Evaluation cur = evaluate(h, z1, z2, true);
  double best = cur.ratio2;
  est.z1 = z1;
  est.z2 = z2;

  // Step length as a fraction of the radius: starts at step_size, doubles
  // after an accepted step (up to the ball diameter) and halves on rejection.
  double frac = step_size;
  for (int s = 0; s < steps; ++s) {
    const double gn = std::sqrt(squared_norm(cur.g1) + squared_norm(cur.g2));
    bool moved = false;
    if (gn > 0.0 && std::isfinite(gn)) {
      for (int k = 0; k <= kMaxHalvings; ++k, frac *= 0.5) {
        const double eta = frac * radius / gn;
        Tensor t1 = z1;
        t1.axpy(eta, cur.g1);
        t1 = project_ball(t1, ball);
        Tensor t2 = z2;
        t2.axpy(eta, cur.g2);
        t2 = project_ball(t2, ball);
        // merging the pair leaves the ratio undefined; treat it as a rejection
        if (norm(t2 - t1) <= min_sep) continue;
        Evaluation trial = evaluate(h, t1, t2, false);
        if (trial.ratio2 >= cur.ratio2) {
          z1 = std::move(t1);
          z2 = std::move(t2);
          cur = evaluate(h, z1, z2, true);
          moved = true;
          frac = std::min(2.0 * frac, 2.0);
          break;
        }
      }
    }
    if (cur.ratio2 > best) {
      best = cur.ratio2;
      est.z1 = z1;
      est.z2 = z2;
    }
    est.ascent_trace.push_back(std::sqrt(best));
    if (!moved) {
      // Stationary at this resolution; the remaining steps would repeat it.
      while (static_cast<int>(est.ascent_trace.size()) < steps) est.ascent_trace.push_back(std::sqrt(best));
      break;
    }
  }
  est.L = std::sqrt(best);
  return est;
}

ad::Var lipschitz_ratio(const DiffOperator& h, ad::Var z1, ad::Var z2) {
  ad::Var dh = ad::sub(h(z2), h(z1));
  ad::Var dz = ad::sub(z2, z1);
  return ad::div(ad::norm2(dh), ad::norm2(dz));
}

double lipschitz_ratio(const std::function<Tensor(const Tensor&)>& h, const Tensor& z1, const Tensor& z2) {
  const double dz = norm(z2 - z1);
  if (dz == 0.0) throw InvalidArgument("lipschitz_ratio: points coincide");
  return norm(h(z2) - h(z1)) / dz;
}

}  // namespace mnm::lip
