// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "mri/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "error.hpp"

namespace mnm::mri {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(h * w);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw InvalidArgument("fft2: could not create plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(std::span<std::complex<double>> data, std::size_t h, std::size_t w, int sign) {
  if (data.size() != h * w) throw ShapeError("fft2: buffer size does not match H x W");
  fftw_plan plan = cache().get(h, w, sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
  const double s = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (auto& v : data) v *= s;
}

}  // namespace

void fft2_unitary(std::span<std::complex<double>> data, std::size_t height, std::size_t width) {
  run(data, height, width, FFTW_FORWARD);
}

void ifft2_unitary(std::span<std::complex<double>> data, std::size_t height, std::size_t width) {
  run(data, height, width, FFTW_BACKWARD);
}

}  // namespace mnm::mri
