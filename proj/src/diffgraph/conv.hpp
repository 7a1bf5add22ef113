// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Circular (periodic) 2-D cross-correlation kernels.
//   x: [Cin, H, W], weight: [Cout, Cin, k, k], bias: [Cout], y: [Cout, H, W]
//   y[o,i,j] = bias[o] + sum_{c,p,q} weight[o,c,p,q] * x[c, (i+p-r) mod H, (j+q-r) mod W],  r = k/2

#pragma once

#include "diffgraph/tensor.hpp"

namespace mnm::kernels {

void check_conv_shapes(const Tensor& x, const Tensor& weight, const Tensor* bias);

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias);

/// Adds the transpose of the linear part applied to grad_out into grad_x.
void conv2d_backward_input(const Tensor& grad_out, const Tensor& weight, Tensor& grad_x);

/// Accumulates d/dweight of <grad_out, conv2d(x, weight)> into grad_w.
void conv2d_backward_weight(const Tensor& grad_out, const Tensor& x, Tensor& grad_w);

void conv2d_backward_bias(const Tensor& grad_out, Tensor& grad_b);

}  // namespace mnm::kernels
