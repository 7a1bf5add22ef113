// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "diffgraph/tensor.hpp"

namespace mnm::io {

/// 8-bit grayscale PNG of an [H, W] array; values are clipped to [0, 1].
void write_png(const std::filesystem::path& path, const Tensor& gray);

/// Magnitude of a [2, H, W] image divided by `peak` (its own maximum when
/// peak <= 0) and multiplied by `gain`.
Tensor display_magnitude(const Tensor& image, double peak = 0.0, double gain = 1.0);

}  // namespace mnm::io
