// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace mnm::verify {

/// Sizes and counts for the property suites run by verify-lemmas.
struct VerifyConfig {
  std::uint64_t seed = 0;
  std::size_t image_size = 16;
  int lemma_configs = 20;       // operator/ball configurations for the monotonicity suite
  int pairs_per_config = 50;    // sampled pairs per configuration
  int uniqueness_inits = 20;    // initializations per model for local uniqueness
  int robustness_trials = 50;   // perturbations per model for the robustness bound
  int certify_steps = 200;      // ascent steps for certified Lipschitz values
  double delta = 0.2;           // relative ball radius for synthetic instances
};

}  // namespace mnm::verify
