// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "mri/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mnm::mri {
namespace {

constexpr double kPi = std::numbers::pi;

// Signed frequency of FFT index i on an axis of length n.
double signed_freq(std::size_t i, std::size_t n) {
  return i < (n + 1) / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

bool in_center(std::size_t i, std::size_t n) {
  const double f = signed_freq(i, n);
  return f >= -4.0 && f <= 3.0;
}

// Efraimidis-Spirakis weighted sampling without replacement: keep the
// `count` candidates with the largest log(u) / weight.
std::vector<std::size_t> weighted_pick(const std::vector<std::pair<std::size_t, double>>& candidates,
                                       std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(candidates.size());
  for (const auto& [index, weight] : candidates) {
    double u = uni(rng);
    while (u <= 0.0) u = uni(rng);
    keyed.emplace_back(std::log(u) / weight, index);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<long>(count), keyed.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t i = 0; i < count; ++i) picked.push_back(keyed[i].second);
  return picked;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Tensor generate_phantom(std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height == 0 || width == 0) throw InvalidArgument("generate_phantom: empty image");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

  struct Bump {
    double cy, cx, ay, ax, angle, amp;
  };
  std::vector<Bump> bumps;
  // Outline with a few interior structures.
  bumps.push_back({range(-0.05, 0.05), range(-0.05, 0.05), range(0.7, 0.85), range(0.6, 0.8), range(-0.3, 0.3), 0.4});
  const int interior = 4 + static_cast<int>(uni(rng) * 4.0);
  for (int k = 0; k < interior; ++k) {
    bumps.push_back({range(-0.45, 0.45), range(-0.45, 0.45), range(0.08, 0.3), range(0.08, 0.3), range(0.0, kPi),
                     range(-0.3, 0.6)});
  }
  const double ramp_y = range(-kPi, kPi);
  const double ramp_x = range(-kPi, kPi);
  const double phase0 = range(-kPi, kPi);
  constexpr double edge = 0.08;

  Tensor x = make_image(height, width);
  const std::size_t n = height * width;
  double peak = 0.0;
  for (std::size_t i = 0; i < height; ++i) {
    const double y = 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(height) - 1.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double xx = 2.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(width) - 1.0;
      double mag = 0.0;
      for (const Bump& b : bumps) {
        const double dy = y - b.cy, dx = xx - b.cx;
        const double c = std::cos(b.angle), s = std::sin(b.angle);
        const double u = (c * dy + s * dx) / b.ay;
        const double v = (-s * dy + c * dx) / b.ax;
        const double rho = std::sqrt(u * u + v * v);
        mag += b.amp / (1.0 + std::exp((rho - 1.0) / edge));
      }
      mag = std::max(mag, 0.0);
      const double phase = phase0 + 0.5 * (ramp_y * y + ramp_x * xx);
      x[i * width + j] = mag * std::cos(phase);
      x[n + i * width + j] = mag * std::sin(phase);
      peak = std::max(peak, mag);
    }
  }
  if (peak > 0.0) x *= 1.0 / peak;
  return x;
}

Tensor generate_coil_maps(std::size_t coils, std::size_t height, std::size_t width, std::uint64_t seed) {
  if (coils == 0) throw InvalidArgument("generate_coil_maps: need at least one coil");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::size_t n = height * width;
  Tensor maps({coils, 2, height, width});
  for (std::size_t c = 0; c < coils; ++c) {
    const double theta = 2.0 * kPi * (static_cast<double>(c) + 0.3 * uni(rng)) / static_cast<double>(coils);
    const double py = 1.2 * std::sin(theta), px = 1.2 * std::cos(theta);
    const double width_s = 0.8 + 0.4 * uni(rng);
    const double phase0 = 2.0 * kPi * uni(rng);
    const double gy = (uni(rng) - 0.5) * 2.0, gx = (uni(rng) - 0.5) * 2.0;
    for (std::size_t i = 0; i < height; ++i) {
      const double y = 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(height) - 1.0;
      for (std::size_t j = 0; j < width; ++j) {
        const double x = 2.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(width) - 1.0;
        const double d2 = (y - py) * (y - py) + (x - px) * (x - px);
        const double mag = std::exp(-d2 / (2.0 * width_s * width_s));
        const double phase = phase0 + gy * y + gx * x;
        maps[c * 2 * n + i * width + j] = mag * std::cos(phase);
        maps[c * 2 * n + n + i * width + j] = mag * std::sin(phase);
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < coils; ++c) {
      const double re = maps[c * 2 * n + p], im = maps[c * 2 * n + n + p];
      s += re * re + im * im;
    }
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t c = 0; c < coils; ++c) {
      maps[c * 2 * n + p] *= inv;
      maps[c * 2 * n + n + p] *= inv;
    }
  }
  return maps;
}

Tensor generate_vd_mask(std::size_t height, std::size_t width, double accel, std::uint64_t seed, MaskKind kind) {
  if (!(accel >= 1.0)) throw InvalidArgument("generate_vd_mask: acceleration must be >= 1");
  if (height < 8 || (kind == MaskKind::two_d && width < 8)) {
    throw InvalidArgument("generate_vd_mask: image smaller than the 8-sample calibration region");
  }
  Tensor mask({height, width});
  if (accel == 1.0) {
    mask.fill(1.0);
    return mask;
  }
  std::mt19937_64 rng(seed);
  const double sy = 0.25 * static_cast<double>(height);
  const double sx = 0.25 * static_cast<double>(width);

  if (kind == MaskKind::one_d) {
    const std::size_t budget = static_cast<std::size_t>(std::llround(static_cast<double>(height) / accel));
    if (budget < 8) throw InvalidArgument("generate_vd_mask: acceleration exceeds H / (8 central lines)");
    std::vector<std::pair<std::size_t, double>> candidates;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < height; ++i) {
      if (in_center(i, height)) {
        rows.push_back(i);
      } else {
        const double f = signed_freq(i, height);
        candidates.emplace_back(i, std::exp(-0.5 * f * f / (sy * sy)));
      }
    }
    for (std::size_t r : weighted_pick(candidates, budget - rows.size(), rng)) rows.push_back(r);
    for (std::size_t r : rows) {
      for (std::size_t j = 0; j < width; ++j) mask[r * width + j] = 1.0;
    }
    return mask;
  }

  const std::size_t budget =
      static_cast<std::size_t>(std::llround(static_cast<double>(height * width) / accel));
  if (budget < 64) throw InvalidArgument("generate_vd_mask: acceleration exceeds H*W / (8x8 central region)");
  std::vector<std::pair<std::size_t, double>> candidates;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      if (in_center(i, height) && in_center(j, width)) {
        mask[i * width + j] = 1.0;
        ++kept;
        continue;
      }
      const double fy = signed_freq(i, height), fx = signed_freq(j, width);
      candidates.emplace_back(i * width + j, std::exp(-0.5 * (fy * fy / (sy * sy) + fx * fx / (sx * sx))));
    }
  }
  for (std::size_t idx : weighted_pick(candidates, budget - kept, rng)) mask[idx] = 1.0;
  return mask;
}

KSpaceData add_noise(const KSpaceData& b, const MeasurementModel& mm, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_noise: sigma must be >= 0");
  if (b.model_id != mm.id()) throw ModelMismatch("add_noise: k-space data belongs to a different model");
  KSpaceData out = b;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  const std::size_t n = mm.height() * mm.width();
  for (std::size_t c = 0; c < 2 * mm.coils(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (mm.mask()[i] != 0.0) out.samples[c * n + i] += gauss(rng);
    }
  }
  return out;
}

}  // namespace mnm::mri
