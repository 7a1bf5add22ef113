// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "diffgraph/graph.hpp"
#include "diffgraph/tensor.hpp"
#include "mri/measurement.hpp"

namespace mnm::ops {

/// direct:   F(x) = N(x)
/// residual: F(x) = x - N(x), the form used by the MOL baselines where the
///           Lipschitz constant of the CNN N is what gets constrained.
enum class ScoreForm { direct, residual };

struct ConvLayer {
  Tensor weight;  // [Cout, Cin, k, k]
  Tensor bias;    // [Cout]
};

struct NetworkSpec {
  std::vector<std::size_t> channels{2, 16, 16, 2};
  std::size_t kernel = 3;
  ScoreForm form = ScoreForm::direct;
  double init_scale = 1.0;    // multiplies He-normal init of hidden layers
  double output_scale = 0.1;  // extra factor on the last layer
};

/// Circular CNN with ReLU between layers mapping [2, H, W] to [2, H, W].
class ScoreNetwork {
 public:
  ScoreNetwork() = default;
  ScoreNetwork(std::vector<ConvLayer> layers, ScoreForm form);

  static ScoreNetwork zeros(const NetworkSpec& spec);
  static ScoreNetwork random(const NetworkSpec& spec, std::uint64_t seed);

  Tensor apply(const Tensor& x) const;
  /// N(x), i.e. without the residual wrapper.
  Tensor apply_cnn(const Tensor& x) const;

  /// Graph versions; `params` comes from bind() on the same graph.
  ad::Var apply(ad::Var x, std::span<const ad::Var> params) const;
  ad::Var apply_cnn(ad::Var x, std::span<const ad::Var> params) const;
  /// Registers weights and biases as leaves in layer order [w0, b0, w1, b1, ...].
  std::vector<ad::Var> bind(ad::Graph& g, bool requires_grad) const;

  ScoreForm form() const noexcept { return form_; }
  const std::vector<ConvLayer>& layers() const noexcept { return layers_; }
  std::vector<ConvLayer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const;
  /// Flat view of all parameters in bind() order.
  std::vector<double> theta() const;
  void set_theta(std::span<const double> theta);
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

 private:
  void validate() const;

  std::vector<ConvLayer> layers_;
  ScoreForm form_ = ScoreForm::direct;
};

/// Parameter-free linear score F(x) = beta x - lambda A^H A x, used to build
/// closed-form test operators.
struct LinearScore {
  double beta = 0.0;
  double lambda = 0.0;
  mri::MeasurementModel mm;
};

using Score = std::variant<ScoreNetwork, LinearScore>;

Tensor score_apply(const Score& f, const Tensor& x);
ad::Var score_apply(const Score& f, ad::Var x, std::span<const ad::Var> params);
std::vector<ad::Var> bind_parameters(const Score& f, ad::Graph& g, bool requires_grad);
std::size_t parameter_count(const Score& f);

}  // namespace mnm::ops
