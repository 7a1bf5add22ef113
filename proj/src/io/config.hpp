// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration as JSON. Every section and key is optional and
// falls back to the defaults; unknown keys and wrong types are errors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "robustness/robustness.hpp"
#include "trainer/trainer.hpp"
#include "verify/verify_config.hpp"

namespace mnm::io {

struct RobustConfig {
  robust::AdversarialOptions adversarial;
  int gaussian_trials = 10;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  train::TrainConfig train;  // includes network, solver and SENSE settings
  RobustConfig robust;
  verify::VerifyConfig verify;
};

ExperimentConfig parse_config(const std::string& text);
/// Serializes every field; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace mnm::io
