// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Array container:
//   "MNM1" | dtype u8 (0 = f64) | ndim u8 | dims ndim x u32 LE | payload f64 LE
// Reading rejects a wrong magic, an unknown dtype, a short file and trailing
// bytes with distinct FormatErrorKind values.

#pragma once

#include <filesystem>
#include <string>

#include "diffgraph/tensor.hpp"

namespace mnm::io {

std::string encode_array(const Tensor& t);
Tensor decode_array(const std::string& bytes);

void write_array(const std::filesystem::path& path, const Tensor& t);
Tensor read_array(const std::filesystem::path& path);

/// Whole-file helpers shared by the writers.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mnm::io
