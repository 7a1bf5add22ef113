// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "operators/spectral.hpp"

#include <cmath>
#include <random>
#include <string>

#include "diffgraph/conv.hpp"
#include "error.hpp"

namespace mnm::ops {

double conv_spectral_norm(const Tensor& weight, std::size_t height, std::size_t width,
                          const PowerIterationOptions& opts, Tensor* start) {
  if (weight.rank() != 4) throw ShapeError("conv_spectral_norm: weight must be [Cout, Cin, k, k]");
  const Shape in_shape{weight.dim(1), height, width};
  Tensor v(in_shape);
  if (start && start->shape() == in_shape && norm(*start) > 0.0) {
    v = *start;
  } else {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& e : v.values()) e = gauss(rng);
  }
  v *= 1.0 / norm(v);

  double sigma2 = 0.0;
  double change = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Tensor u = kernels::conv2d(v, weight, nullptr);
    Tensor w(in_shape);
    kernels::conv2d_backward_input(u, weight, w);
    const double next = dot(v, w);  // ||W v||^2 with ||v|| = 1
    change = next > 0.0 ? std::abs(next - sigma2) / next : 0.0;
    sigma2 = next;
    const double wn = norm(w);
    if (wn == 0.0) {
      sigma2 = 0.0;
      change = 0.0;
      break;
    }
    v = std::move(w);
    v *= 1.0 / wn;
    if (it >= opts.min_iter && change <= opts.tol) break;
  }
  if (change > opts.fail_tol) {
    throw ConvergenceError("conv_spectral_norm: power iteration did not settle (relative change " +
                               std::to_string(change) + ")",
                           change);
  }
  if (start) *start = v;
  return std::sqrt(sigma2);
}

ScoreNetwork spectral_normalize(const ScoreNetwork& net, double target, std::size_t height, std::size_t width,
                                SpectralState* state, const PowerIterationOptions& opts) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("spectral_normalize: target must be in (0, 1)");
  ScoreNetwork out = net;
  auto& layers = out.layers();
  const double budget = std::pow(target, 1.0 / static_cast<double>(layers.size()));
  if (state && state->vectors.size() != layers.size()) state->vectors.assign(layers.size(), Tensor());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Tensor* start = state ? &state->vectors[i] : nullptr;
    const double sigma = conv_spectral_norm(layers[i].weight, height, width, opts, start);
    if (sigma > budget * (1.0 + 1e-6)) layers[i].weight *= budget / sigma;
  }
  return out;
}

double layer_norm_product(const ScoreNetwork& net, std::size_t height, std::size_t width) {
  double p = 1.0;
  for (const ConvLayer& l : net.layers()) p *= conv_spectral_norm(l.weight, height, width);
  return p;
}

}  // namespace mnm::ops
