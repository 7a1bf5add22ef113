// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multicoil Cartesian forward model: per coil c,
//   (A x)_c = mask * FFT2(S_c * x)
// with the unitary FFT, and adjoint A^H b = sum_c conj(S_c) * IFFT2(mask * b_c).

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "diffgraph/graph.hpp"
#include "diffgraph/tensor.hpp"

namespace mnm::mri {

class MeasurementModel {
 public:
  /// mask: [H, W] with entries in {0, 1}; coil_maps: [C, 2, H, W] with
  /// sum_c |S_c(p)|^2 = 1 at every pixel (checked to 1e-6).
  MeasurementModel(Tensor mask, Tensor coil_maps, double noise_sigma = 0.0);

  /// One coil with S = 1 everywhere.
  static MeasurementModel single_coil(Tensor mask, double noise_sigma = 0.0);
  /// Single coil, full mask: A is the unitary 2-D DFT.
  static MeasurementModel identity(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t coils() const noexcept { return coils_; }
  const Tensor& mask() const noexcept { return *mask_ptr_; }
  const Tensor& coil_maps() const noexcept { return *maps_ptr_; }
  double noise_sigma() const noexcept { return sigma_; }
  /// Content fingerprint of mask and maps; k-space data carries it.
  std::uint64_t id() const noexcept { return id_; }
  /// Fraction of k-space locations kept.
  double sampling_fraction() const;

  Shape image_shape() const { return {2, height_, width_}; }
  Shape kspace_shape() const { return {coils_, 2, height_, width_}; }

 private:
  // immutable and shared, so copies of a model are cheap
  std::shared_ptr<const Tensor> mask_ptr_;
  std::shared_ptr<const Tensor> maps_ptr_;
  double sigma_;
  std::size_t height_, width_, coils_;
  std::uint64_t id_;
};

struct KSpaceData {
  Tensor samples;  // [C, 2, H, W], zero where the mask is zero
  std::uint64_t model_id = 0;
};

KSpaceData apply_A(const Tensor& x, const MeasurementModel& mm);
Tensor apply_AH(const KSpaceData& b, const MeasurementModel& mm);
Tensor apply_AHA(const Tensor& x, const MeasurementModel& mm);

/// A^H A as a self-adjoint graph node.
ad::Var apply_AHA(ad::Var x, const MeasurementModel& mm);

/// Rebinds raw samples to `mm`, zeroing anything outside the mask.
KSpaceData bind_kspace(Tensor samples, const MeasurementModel& mm);

}  // namespace mnm::mri
