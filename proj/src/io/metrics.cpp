// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace mnm::io {
namespace {

constexpr std::size_t kWindow = 7;

void check_pair(const char* what, const Tensor& x, const Tensor& ref) {
  require_same_shape(what, x, ref);
  if (ref.rank() != 3 || ref.dim(0) != 2) {
    throw ShapeError(std::string(what) + ": expected a [2, H, W] image, got " + shape_string(ref.shape()));
  }
}

double peak(const Tensor& mag, const char* what) {
  const double r = *std::max_element(mag.values().begin(), mag.values().end());
  if (!(r > 0.0)) throw InvalidArgument(std::string(what) + ": reference image is all zero");
  return r;
}

}  // namespace

double psnr(const Tensor& x, const Tensor& ref) {
  check_pair("psnr", x, ref);
  const Tensor a = magnitude(x), b = magnitude(ref);
  const double r = peak(b, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(r * r / mse);
}

double ssim(const Tensor& x, const Tensor& ref) {
  check_pair("ssim", x, ref);
  const std::size_t h = ref.dim(1), w = ref.dim(2);
  if (h < kWindow || w < kWindow) throw ShapeError("ssim: image smaller than the 7x7 window");
  const Tensor a = magnitude(x), b = magnitude(ref);
  const double r = peak(b, "ssim");
  const double c1 = (0.01 * r) * (0.01 * r), c2 = (0.03 * r) * (0.03 * r);
  const double n = static_cast<double>(kWindow * kWindow);
  double total = 0.0;
  for (std::size_t i = 0; i + kWindow <= h; ++i) {
    for (std::size_t j = 0; j + kWindow <= w; ++j) {
      double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (std::size_t p = 0; p < kWindow; ++p) {
        for (std::size_t q = 0; q < kWindow; ++q) {
          const double u = a[(i + p) * w + j + q], v = b[(i + p) * w + j + q];
          sa += u;
          sb += v;
          saa += u * u;
          sbb += v * v;
          sab += u * v;
        }
      }
      const double ma = sa / n, mb = sb / n;
      const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / static_cast<double>((h - kWindow + 1) * (w - kWindow + 1));
}

}  // namespace mnm::io
