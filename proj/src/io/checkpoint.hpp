// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trained models as JSON: variant, m, delta, lambda, solver settings and the
// network layers. Doubles are written with round-trip precision, so loading
// a saved model reproduces it bit for bit.

#pragma once

#include <filesystem>
#include <string>

#include "trainer/trainer.hpp"

namespace mnm::io {

std::string encode_checkpoint(const train::TrainedModel& model);
train::TrainedModel decode_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const train::TrainedModel& model);
train::TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mnm::io
