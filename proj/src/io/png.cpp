// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "error.hpp"

namespace mnm::io {

void write_png(const std::filesystem::path& path, const Tensor& gray) {
  if (gray.rank() != 2) throw ShapeError("write_png: expected [H, W], got " + shape_string(gray.shape()));
  const std::size_t h = gray.dim(0), w = gray.dim(1);
  std::vector<std::uint8_t> pixels(h * w);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::isfinite(gray[i]) ? std::clamp(gray[i], 0.0, 1.0) : 0.0;
    pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("write_png: '" + path.string() + "': " + msg);
  }
}

Tensor display_magnitude(const Tensor& image, double peak, double gain) {
  Tensor mag = magnitude(image);
  if (!(peak > 0.0)) peak = *std::max_element(mag.values().begin(), mag.values().end());
  if (peak > 0.0) mag *= gain / peak;
  return mag;
}

}  // namespace mnm::io
