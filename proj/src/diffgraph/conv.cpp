// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffgraph/conv.hpp"

#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace mnm::kernels {
namespace {

constexpr std::size_t kBlock = 8;

// Circularly pads each [H, W] plane by r on every side.
std::vector<double> pad_planes(const double* x, std::size_t channels, std::size_t h, std::size_t w, std::size_t r) {
  const std::size_t ph = h + 2 * r, pw = w + 2 * r;
  std::vector<double> out(channels * ph * pw);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src = x + c * h * w;
    double* dst = out.data() + c * ph * pw;
    for (std::size_t i = 0; i < ph; ++i) {
      const double* row = src + ((i + h - r % h) % h) * w;
      double* d = dst + i * pw;
      for (std::size_t j = 0; j < pw; ++j) d[j] = row[(j + w - r % w) % w];
    }
  }
  return out;
}

// y[o] = bias[o] + sum_c corr(x[c], wt[o, c]) with x given as padded planes.
// K > 0 fixes the kernel size at compile time so the tap loops unroll and the
// block loop vectorizes; K = 0 reads it from `k`.
template <std::size_t K>
void correlate_impl(const std::vector<double>& xp, std::size_t cin, std::size_t h, std::size_t w, const double* wt,
                    std::size_t cout, std::size_t k_dyn, const double* bias, double* y) {
  const std::size_t k = K ? K : k_dyn;
  const std::size_t pw = w + k - 1, pplane = (h + k - 1) * pw;
  const std::size_t full = w - w % kBlock;
  for (std::size_t o = 0; o < cout; ++o) {
    const double b = bias ? bias[o] : 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      double* yrow = y + (o * h + i) * w;
      for (std::size_t j0 = 0; j0 < full; j0 += kBlock) {
        double acc[kBlock];
        for (std::size_t t = 0; t < kBlock; ++t) acc[t] = b;
        for (std::size_t c = 0; c < cin; ++c) {
          const double* wk = wt + (o * cin + c) * k * k;
          for (std::size_t p = 0; p < k; ++p) {
            const double* srow = xp.data() + c * pplane + (i + p) * pw + j0;
            for (std::size_t q = 0; q < k; ++q) {
              const double a = wk[p * k + q];
#pragma GCC unroll 8
              for (std::size_t t = 0; t < kBlock; ++t) acc[t] += a * srow[q + t];
            }
          }
        }
        for (std::size_t t = 0; t < kBlock; ++t) yrow[j0 + t] = acc[t];
      }
      for (std::size_t j = full; j < w; ++j) {
        double acc = b;
        for (std::size_t c = 0; c < cin; ++c) {
          const double* wk = wt + (o * cin + c) * k * k;
          for (std::size_t p = 0; p < k; ++p) {
            const double* srow = xp.data() + c * pplane + (i + p) * pw + j;
            for (std::size_t q = 0; q < k; ++q) acc += wk[p * k + q] * srow[q];
          }
        }
        yrow[j] = acc;
      }
    }
  }
}

void correlate(const std::vector<double>& xp, std::size_t cin, std::size_t h, std::size_t w, const double* wt,
               std::size_t cout, std::size_t k, const double* bias, double* y) {
  switch (k) {
    case 1: return correlate_impl<1>(xp, cin, h, w, wt, cout, k, bias, y);
    case 3: return correlate_impl<3>(xp, cin, h, w, wt, cout, k, bias, y);
    case 5: return correlate_impl<5>(xp, cin, h, w, wt, cout, k, bias, y);
    default: return correlate_impl<0>(xp, cin, h, w, wt, cout, k, bias, y);
  }
}

}  // namespace

void check_conv_shapes(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  if (x.rank() != 3) throw ShapeError("conv2d: input must be [Cin, H, W], got " + shape_string(x.shape()));
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw ShapeError("conv2d: weight must be [Cout, Cin, k, k], got " + shape_string(weight.shape()));
  }
  if (weight.dim(2) % 2 == 0) throw ShapeError("conv2d: kernel size must be odd, got " + shape_string(weight.shape()));
  if (weight.dim(1) != x.dim(0)) {
    throw ShapeError("conv2d: input channels " + shape_string(x.shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != weight.dim(0))) {
    throw ShapeError("conv2d: bias " + shape_string(bias->shape()) + " vs weight " + shape_string(weight.shape()));
  }
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  check_conv_shapes(x, weight, bias);
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  Tensor y({cout, h, w});
  correlate(pad_planes(x.data(), cin, h, w, k / 2), cin, h, w, weight.data(), cout, k,
            bias ? bias->data() : nullptr, y.data());
  return y;
}

void conv2d_backward_input(const Tensor& grad_out, const Tensor& weight, Tensor& grad_x) {
  const std::size_t cout = weight.dim(0), cin = weight.dim(1), k = weight.dim(2);
  const std::size_t h = grad_out.dim(1), w = grad_out.dim(2);
  // The adjoint is a correlation with the channel-transposed, spatially flipped kernel.
  std::vector<double> flipped(weight.size());
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t q = 0; q < k; ++q)
          flipped[((c * cout + o) * k + (k - 1 - p)) * k + (k - 1 - q)] = weight[((o * cin + c) * k + p) * k + q];
  Tensor gx({cin, h, w});
  correlate(pad_planes(grad_out.data(), cout, h, w, k / 2), cout, h, w, flipped.data(), cin, k, nullptr, gx.data());
  grad_x += gx;
}

void conv2d_backward_weight(const Tensor& grad_out, const Tensor& x, Tensor& grad_w) {
  const std::size_t cout = grad_w.dim(0), cin = grad_w.dim(1), k = grad_w.dim(2);
  const std::size_t h = x.dim(1), w = x.dim(2);
  const std::size_t pw = w + k - 1, pplane = (h + k - 1) * pw;
  const std::vector<double> xp = pad_planes(x.data(), cin, h, w, k / 2);
  for (std::size_t o = 0; o < cout; ++o) {
    const double* g = grad_out.data() + o * h * w;
    for (std::size_t c = 0; c < cin; ++c) {
      double* gw = grad_w.data() + (o * cin + c) * k * k;
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = 0; q < k; ++q) {
          double acc = 0.0;
          for (std::size_t i = 0; i < h; ++i) {
            const double* grow = g + i * w;
            const double* srow = xp.data() + c * pplane + (i + p) * pw + q;
            for (std::size_t j = 0; j < w; ++j) acc += grow[j] * srow[j];
          }
          gw[p * k + q] += acc;
        }
      }
    }
  }
}

void conv2d_backward_bias(const Tensor& grad_out, Tensor& grad_b) {
  const std::size_t cout = grad_out.dim(0);
  const std::size_t plane = grad_out.dim(1) * grad_out.dim(2);
  for (std::size_t o = 0; o < cout; ++o) {
    double s = 0.0;
    const double* g = grad_out.data() + o * plane;
    for (std::size_t i = 0; i < plane; ++i) s += g[i];
    grad_b[o] += s;
  }
}

}  // namespace mnm::kernels
