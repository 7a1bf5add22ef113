// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffgraph/ops.hpp"

#include <cmath>
#include <string>

#include "diffgraph/conv.hpp"
#include "error.hpp"

namespace mnm::ad {
namespace {

Graph& common_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw InvalidArgument("operands live on different graphs");
  return a.graph();
}

void require_scalar(const char* op, Var v) {
  if (!v.value().is_scalar()) throw ShapeError(std::string(op) + ": expected a scalar, got " + shape_string(v.shape()));
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = common_graph(a, b);
  require_same_shape("add", a.value(), b.value());
  return g.record("add", {a, b}, a.value() + b.value(), [](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) *gp[0] += go;
    if (gp[1]) *gp[1] += go;
  });
}

Var sub(Var a, Var b) {
  Graph& g = common_graph(a, b);
  require_same_shape("sub", a.value(), b.value());
  return g.record("sub", {a, b}, a.value() - b.value(), [](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) *gp[0] += go;
    if (gp[1]) *gp[1] -= go;
  });
}

Var scale(Var a, double s) {
  return a.graph().record("scale", {a}, s * a.value(), [s](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) gp[0]->axpy(s, go);
  });
}

Var scale(Var a, Var s) {
  Graph& g = common_graph(a, s);
  require_scalar("scale", s);
  const double sv = s.value().item();
  return g.record("scale_var", {a, s}, sv * a.value(), [a, sv](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) gp[0]->axpy(sv, go);
    if (gp[1]) (*gp[1])[0] += dot(go, a.value());
  });
}

Var mul(Var a, Var b) {
  Graph& g = common_graph(a, b);
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return g.record("mul", {a, b}, std::move(out), [a, b](const Tensor& go, std::span<Tensor* const> gp) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (gp[0]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gp[0])[i] += go[i] * bv[i];
    }
    if (gp[1]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gp[1])[i] += go[i] * av[i];
    }
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return a.graph().record("relu", {a}, std::move(out), [a](const Tensor& go, std::span<Tensor* const> gp) {
    if (!gp[0]) return;
    const Tensor& av = a.value();
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (av[i] > 0.0) (*gp[0])[i] += go[i];
    }
  });
}

Var conv2d(Var x, Var weight, Var bias) {
  Graph& g = common_graph(x, weight);
  common_graph(x, bias);
  Tensor out = kernels::conv2d(x.value(), weight.value(), &bias.value());
  return g.record("conv2d", {x, weight, bias}, std::move(out),
                  [x, weight](const Tensor& go, std::span<Tensor* const> gp) {
                    if (gp[0]) kernels::conv2d_backward_input(go, weight.value(), *gp[0]);
                    if (gp[1]) kernels::conv2d_backward_weight(go, x.value(), *gp[1]);
                    if (gp[2]) kernels::conv2d_backward_bias(go, *gp[2]);
                  });
}

Var conv2d(Var x, Var weight) {
  Graph& g = common_graph(x, weight);
  Tensor out = kernels::conv2d(x.value(), weight.value(), nullptr);
  return g.record("conv2d", {x, weight}, std::move(out), [x, weight](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) kernels::conv2d_backward_input(go, weight.value(), *gp[0]);
    if (gp[1]) kernels::conv2d_backward_weight(go, x.value(), *gp[1]);
  });
}

Var inner(Var a, Var b) {
  Graph& g = common_graph(a, b);
  require_same_shape("inner", a.value(), b.value());
  return g.record("inner", {a, b}, Tensor::scalar(dot(a.value(), b.value())),
                  [a, b](const Tensor& go, std::span<Tensor* const> gp) {
                    const double s = go.item();
                    if (gp[0]) gp[0]->axpy(s, b.value());
                    if (gp[1]) gp[1]->axpy(s, a.value());
                  });
}

Var norm2(Var a) {
  const double n = norm(a.value());
  return a.graph().record("norm2", {a}, Tensor::scalar(n), [a, n](const Tensor& go, std::span<Tensor* const> gp) {
    if (!gp[0] || n == 0.0) return;
    gp[0]->axpy(go.item() / n, a.value());
  });
}

Var div(Var a, Var b) {
  Graph& g = common_graph(a, b);
  require_scalar("div", a);
  require_scalar("div", b);
  const double av = a.value().item();
  const double bv = b.value().item();
  return g.record("div", {a, b}, Tensor::scalar(av / bv), [av, bv](const Tensor& go, std::span<Tensor* const> gp) {
    const double s = go.item();
    if (gp[0]) (*gp[0])[0] += s / bv;
    if (gp[1]) (*gp[1])[0] -= s * av / (bv * bv);
  });
}

Var sqrt(Var a) {
  require_scalar("sqrt", a);
  const double r = std::sqrt(a.value().item());
  return a.graph().record("sqrt", {a}, Tensor::scalar(r), [r](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0] && r > 0.0) (*gp[0])[0] += go.item() / (2.0 * r);
  });
}

Var linear(const char* op, Var x, const LinearFn& forward, const LinearFn& adjoint) {
  Tensor out = forward(x.value());
  return x.graph().record(op, {x}, std::move(out), [adjoint](const Tensor& go, std::span<Tensor* const> gp) {
    if (gp[0]) *gp[0] += adjoint(go);
  });
}

}  // namespace mnm::ad
