// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Image quality on complex magnitudes. R = max |ref| throughout.

#pragma once

#include "diffgraph/tensor.hpp"

namespace mnm::io {

/// 10 log10(R^2 / mse) over the H x W magnitude pixels of [2, H, W] images.
/// Returns +infinity when mse = 0; throws if ref is all zero.
double psnr(const Tensor& x, const Tensor& ref);

/// Mean single-scale SSIM over all valid 7x7 uniform windows, population
/// statistics, C1 = (0.01 R)^2 and C2 = (0.03 R)^2.
double ssim(const Tensor& x, const Tensor& ref);

}  // namespace mnm::io
