// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic stand-ins for scanner data. Every generator is a pure function of
// its arguments and seed.

#pragma once

#include <cstddef>
#include <cstdint>

#include "diffgraph/tensor.hpp"
#include "mri/measurement.hpp"

namespace mnm::mri {

/// Mixes a base seed with a stream index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Smooth elliptical bumps under a random linear phase ramp; max |x| = 1.
Tensor generate_phantom(std::size_t height, std::size_t width, std::uint64_t seed);

/// Smooth complex sensitivities for coils spread around the field of view,
/// normalized so that sum_c |S_c|^2 = 1. Shape [C, 2, H, W].
Tensor generate_coil_maps(std::size_t coils, std::size_t height, std::size_t width, std::uint64_t seed);

enum class MaskKind { two_d, one_d };

/// Variable-density Cartesian mask in unshifted FFT order (DC at [0, 0]).
/// The central 8x8 block (two_d) or 8 lines (one_d) is always kept; the rest
/// of the budget round(HW / accel) is drawn by Gaussian-weighted sampling
/// without replacement.
Tensor generate_vd_mask(std::size_t height, std::size_t width, double accel, std::uint64_t seed,
                        MaskKind kind = MaskKind::two_d);

/// Circular Gaussian noise with std `sigma` per real channel at sampled
/// locations only.
KSpaceData add_noise(const KSpaceData& b, const MeasurementModel& mm, double sigma, std::uint64_t seed);

}  // namespace mnm::mri
