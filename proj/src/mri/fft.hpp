// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace mnm::mri {

/// Unitary 2-D DFT (1/sqrt(HW) in both directions) on a row-major H x W
/// buffer, in place. Backed by FFTW; plans are cached per size.
void fft2_unitary(std::span<std::complex<double>> data, std::size_t height, std::size_t width);
void ifft2_unitary(std::span<std::complex<double>> data, std::size_t height, std::size_t width);

}  // namespace mnm::mri
