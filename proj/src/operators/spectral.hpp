// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "diffgraph/tensor.hpp"
#include "operators/score_network.hpp"

namespace mnm::ops {

struct PowerIterationOptions {
  int min_iter = 20;
  int max_iter = 3000;
  double tol = 1e-13;         // stop once the relative change of sigma^2 drops below this
  double fail_tol = 1e-6;     // error if the last change is still above this
};

/// Operator norm of the bias-free circular convolution `weight` acting on
/// [Cin, H, W] images, by power iteration on W^T W. `start` (optional,
/// [Cin, H, W]) warm-starts the iteration and receives the final vector.
double conv_spectral_norm(const Tensor& weight, std::size_t height, std::size_t width,
                          const PowerIterationOptions& opts = {}, Tensor* start = nullptr);

/// Warm-start vectors kept across repeated normalizations during training.
struct SpectralState {
  std::vector<Tensor> vectors;
};

/// Rescales the CNN layers of `net` so each has spectral norm at most
/// target^(1/depth), hence the layer product (ReLU counted as 1-Lipschitz) is
/// at most `target`. Layers already within 1e-6 of their budget are left
/// untouched, so applying it twice is a no-op.
ScoreNetwork spectral_normalize(const ScoreNetwork& net, double target, std::size_t height, std::size_t width,
                                SpectralState* state = nullptr, const PowerIterationOptions& opts = {});

/// Product of per-layer spectral norms: an upper bound on the CNN's Lipschitz constant.
double layer_norm_product(const ScoreNetwork& net, std::size_t height, std::size_t width);

}  // namespace mnm::ops
