// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic datasets and their on-disk layout:
//   DIR/manifest.json
//   DIR/sample_0000_image.mnm   [2, H, W]
//   DIR/sample_0000_maps.mnm    [C, 2, H, W]
//   DIR/sample_0000_mask.mnm    [H, W]
//   DIR/sample_0000_kspace.mnm  [C, 2, H, W]

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mri/generators.hpp"
#include "trainer/trainer.hpp"

namespace mnm::io {

struct DatasetSpec {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t coils = 4;
  double accel = 4.0;
  std::size_t count = 10;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  mri::MaskKind mask = mri::MaskKind::two_d;
};

/// Sample k draws its phantom, coil maps, mask and noise from independent
/// streams derived from (seed, k).
std::vector<train::TrainSample> generate_dataset(const DatasetSpec& spec);

/// Creates `dir` if needed and writes the manifest and one container per
/// array. Existing sample files are overwritten.
void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   const std::vector<train::TrainSample>& data);
std::vector<train::TrainSample> read_dataset(const std::filesystem::path& dir);
DatasetSpec read_manifest(const std::filesystem::path& dir);

const char* mask_kind_name(mri::MaskKind k);
mri::MaskKind parse_mask_kind(const std::string& s);

}  // namespace mnm::io
