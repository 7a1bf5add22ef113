// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for tests: random tensors, finite differences and dense
// materialization of linear maps for Eigen-based oracles.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>

#include "diffgraph/graph.hpp"
#include "diffgraph/tensor.hpp"

namespace mnm::test {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Tensor t(shape);
  for (double& v : t.values()) v = g(rng);
  return t;
}

/// Bernoulli(keep) mask with DC always kept, for images too small for the
/// variable-density generator.
inline Tensor random_mask(std::size_t h, std::size_t w, double keep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor m({h, w});
  for (double& v : m.values()) v = u(rng) < keep ? 1.0 : 0.0;
  m[0] = 1.0;
  return m;
}

inline double rel_err(const Tensor& a, const Tensor& b) {
  return norm(a - b) / std::max(norm(b), 1e-300);
}

/// Central differences of a scalar function along every coordinate of x.
inline Tensor fd_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h = 1e-6) {
  Tensor g = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

/// Columns are map(e_j) for unit vectors e_j of `in_shape`.
inline Eigen::MatrixXd materialize(const std::function<Tensor(const Tensor&)>& map, const Shape& in_shape) {
  const std::size_t n = shape_numel(in_shape);
  Eigen::MatrixXd m;
  for (std::size_t j = 0; j < n; ++j) {
    Tensor e(in_shape);
    e[j] = 1.0;
    const Tensor col = map(e);
    if (j == 0) m.resize(static_cast<Eigen::Index>(col.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < col.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return m;
}

inline Eigen::VectorXd to_eigen(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

inline Tensor from_eigen(const Eigen::VectorXd& v, const Shape& shape) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = v(static_cast<Eigen::Index>(i));
  return t;
}

/// Naive circular cross-correlation written independently of the library kernels.
inline Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor* bias) {
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  const long r = static_cast<long>(k / 2);
  Tensor y({cout, h, wd});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < wd; ++j) {
        double s = bias ? (*bias)[o] : 0.0;
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = 0; q < k; ++q) {
              const long ii = ((static_cast<long>(i + p) - r) % static_cast<long>(h) + static_cast<long>(h)) % static_cast<long>(h);
              const long jj = ((static_cast<long>(j + q) - r) % static_cast<long>(wd) + static_cast<long>(wd)) % static_cast<long>(wd);
              s += w[((o * cin + c) * k + p) * k + q] * x[(c * h + static_cast<std::size_t>(ii)) * wd + static_cast<std::size_t>(jj)];
            }
        y[(o * h + i) * wd + j] = s;
      }
  return y;
}

}  // namespace mnm::test
