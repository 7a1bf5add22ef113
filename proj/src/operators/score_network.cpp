// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "operators/score_network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "diffgraph/conv.hpp"
#include "diffgraph/ops.hpp"
#include "error.hpp"

namespace mnm::ops {

ScoreNetwork::ScoreNetwork(std::vector<ConvLayer> layers, ScoreForm form) : layers_(std::move(layers)), form_(form) {
  validate();
}

void ScoreNetwork::validate() const {
  if (layers_.empty()) throw InvalidArgument("ScoreNetwork: needs at least one layer");
  std::size_t channels = 2;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const ConvLayer& l = layers_[i];
    kernels::check_conv_shapes(Tensor({channels, 1, 1}), l.weight, &l.bias);
    channels = l.weight.dim(0);
  }
  if (channels != 2) throw ShapeError("ScoreNetwork: last layer must output 2 channels");
}

ScoreNetwork ScoreNetwork::zeros(const NetworkSpec& spec) {
  if (spec.channels.size() < 2 || spec.channels.front() != 2 || spec.channels.back() != 2) {
    throw InvalidArgument("NetworkSpec: channels must start and end with 2");
  }
  std::vector<ConvLayer> layers;
  for (std::size_t i = 0; i + 1 < spec.channels.size(); ++i) {
    layers.push_back({Tensor({spec.channels[i + 1], spec.channels[i], spec.kernel, spec.kernel}),
                      Tensor({spec.channels[i + 1]})});
  }
  return ScoreNetwork(std::move(layers), spec.form);
}

ScoreNetwork ScoreNetwork::random(const NetworkSpec& spec, std::uint64_t seed) {
  ScoreNetwork net = zeros(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    Tensor& w = net.layers_[i].weight;
    const double fan_in = static_cast<double>(w.dim(1) * w.dim(2) * w.dim(3));
    double std_dev = spec.init_scale * std::sqrt(2.0 / fan_in);
    if (i + 1 == net.layers_.size()) std_dev *= spec.output_scale;
    std::normal_distribution<double> gauss(0.0, std_dev);
    for (double& v : w.values()) v = gauss(rng);
  }
  return net;
}

Tensor ScoreNetwork::apply_cnn(const Tensor& x) const {
  require_image("score_apply", x);
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = kernels::conv2d(h, layers_[i].weight, &layers_[i].bias);
    if (i + 1 < layers_.size()) {
      for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
    }
  }
  return h;
}

Tensor ScoreNetwork::apply(const Tensor& x) const {
  Tensor n = apply_cnn(x);
  if (form_ == ScoreForm::direct) return n;
  return x - n;
}

ad::Var ScoreNetwork::apply_cnn(ad::Var x, std::span<const ad::Var> params) const {
  require_image("score_apply", x.value());
  if (params.size() != 2 * layers_.size()) throw InvalidArgument("ScoreNetwork: parameter binding has wrong length");
  ad::Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = ad::conv2d(h, params[2 * i], params[2 * i + 1]);
    if (i + 1 < layers_.size()) h = ad::relu(h);
  }
  return h;
}

ad::Var ScoreNetwork::apply(ad::Var x, std::span<const ad::Var> params) const {
  ad::Var n = apply_cnn(x, params);
  if (form_ == ScoreForm::direct) return n;
  return ad::sub(x, n);
}

std::vector<ad::Var> ScoreNetwork::bind(ad::Graph& g, bool requires_grad) const {
  std::vector<ad::Var> out;
  out.reserve(2 * layers_.size());
  for (const ConvLayer& l : layers_) {
    out.push_back(g.leaf(l.weight, requires_grad));
    out.push_back(g.leaf(l.bias, requires_grad));
  }
  return out;
}

std::size_t ScoreNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const ConvLayer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<Tensor*> ScoreNetwork::parameters() {
  std::vector<Tensor*> out;
  for (ConvLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> ScoreNetwork::parameters() const {
  std::vector<const Tensor*> out;
  for (const ConvLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<double> ScoreNetwork::theta() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const Tensor* t : parameters()) out.insert(out.end(), t->values().begin(), t->values().end());
  return out;
}

void ScoreNetwork::set_theta(std::span<const double> theta) {
  if (theta.size() != parameter_count()) {
    throw ShapeError("ScoreNetwork::set_theta: expected " + std::to_string(parameter_count()) + " values, got " +
                     std::to_string(theta.size()));
  }
  std::size_t k = 0;
  for (Tensor* t : parameters()) {
    for (double& v : t->values()) v = theta[k++];
  }
}

Tensor score_apply(const Score& f, const Tensor& x) {
  if (const auto* net = std::get_if<ScoreNetwork>(&f)) return net->apply(x);
  const auto& lin = std::get<LinearScore>(f);
  Tensor out = mri::apply_AHA(x, lin.mm);
  out *= -lin.lambda;
  out.axpy(lin.beta, x);
  return out;
}

ad::Var score_apply(const Score& f, ad::Var x, std::span<const ad::Var> params) {
  if (const auto* net = std::get_if<ScoreNetwork>(&f)) return net->apply(x, params);
  const auto& lin = std::get<LinearScore>(f);
  return ad::sub(ad::scale(x, lin.beta), ad::scale(mri::apply_AHA(x, lin.mm), lin.lambda));
}

std::vector<ad::Var> bind_parameters(const Score& f, ad::Graph& g, bool requires_grad) {
  if (const auto* net = std::get_if<ScoreNetwork>(&f)) return net->bind(g, requires_grad);
  return {};
}

std::size_t parameter_count(const Score& f) {
  if (const auto* net = std::get_if<ScoreNetwork>(&f)) return net->parameter_count();
  return 0;
}

}  // namespace mnm::ops
