// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Supervised DEQ training with a local Lipschitz penalty:
//   C_k = ||x*(k) - x(k)||^2 + beta * ReLU(L[H(x*(k))] - T)^2,  T = 1 - m
// L is estimated with the parameters frozen, then the ratio at the certifying
// pair is differentiated with respect to the parameters.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fixed_point/deq_model.hpp"
#include "lipschitz/lipschitz.hpp"
#include "mri/measurement.hpp"
#include "mri/sense.hpp"
#include "operators/score_network.hpp"

namespace mnm::train {

/// mnm_mol: steepest descent, penalty on H = I - Q.
/// mol_l:   forward-backward, penalty on the CNN N inside F = x - N(x).
/// mol_sn:  forward-backward, N spectrally normalized after every update, no penalty.
enum class Variant { mnm_mol, mol_l, mol_sn };
enum class OptimizerKind { sgd, adam };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct TrainConfig {
  double m = 0.1;
  double beta = 1.0;
  double delta = 0.0;  // relative ball radius; <= 0 selects it from the data
  int epochs = 10;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  int pga_steps = 15;
  double pga_step_size = 0.1;
  std::uint64_t seed = 0;
  double lambda_init = 10.0;
  bool train_lambda = true;
  double lambda_min = 1e-2;
  double failure_budget = 0.1;
  Variant variant = Variant::mnm_mol;
  ops::NetworkSpec network{{2, 16, 16, 2}, 3, ops::ScoreForm::residual, 1.0, 0.1};
  SolverConfig solver = training_solver();
  mri::SenseOptions sense;

  /// Solver defaults with the iteration caps raised to 300: at m = 0.1 the
  /// steepest-descent rate is about 0.9 per step.
  static SolverConfig training_solver() {
    SolverConfig s;
    s.max_iter = 300;
    s.backward_max_iter = 300;
    return s;
  }

  double T() const { return 1.0 - m; }
  /// beta as used by the variant (mol_sn trains without the penalty).
  double effective_beta() const { return variant == Variant::mol_sn ? 0.0 : beta; }
  void validate() const;
};

struct TrainSample {
  Tensor x_ref;
  mri::KSpaceData b;
  mri::MeasurementModel mm;
};

/// A trained reconstruction map together with the settings that define it.
struct TrainedModel {
  DeqModel deq;
  Variant variant = Variant::mnm_mol;
  double m = 0.1;
  double delta = 0.0;
};

SolverKind solver_for(Variant v);

/// ||sense_init(b) - x_ref|| / ||x_ref|| for every sample.
std::vector<double> sense_error_ratios(const std::vector<TrainSample>& data, const mri::SenseOptions& sense);
/// Maximum of sense_error_ratios; throws on an empty dataset.
double choose_delta(const std::vector<TrainSample>& data, double mu);

/// The operator whose local Lipschitz constant is constrained, bound to
/// graph leaves in `b` (H for mnm_mol, the CNN N for the MOL variants).
ad::Var constrained_operator(const TrainedModel& model, const mri::MeasurementModel& mm, ad::Var z,
                             const ops::OperatorBinding& b);
/// Same operator with frozen parameters.
lip::DiffOperator frozen_operator(const TrainedModel& model, const mri::MeasurementModel& mm);

struct SampleResult {
  double loss = 0.0;
  double data_loss = 0.0;
  double penalty = 0.0;
  double L = 0.0;
  Tensor x_star;
  int forward_iterations = 0;
  std::vector<Tensor> grad_params;  // bind() order
  double grad_lambda = 0.0;
};

/// Loss and gradient for one sample. `x0` is the forward initialization and
/// `aHb` = A^H b. Throws if the forward or adjoint iteration fails.
SampleResult loss_and_grad(const TrainSample& s, const Tensor& x0, const Tensor& aHb, const TrainedModel& model,
                           const TrainConfig& cfg, std::uint64_t pga_seed);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_L = 0.0;
  double violation_rate = 0.0;
  int skipped = 0;
};

struct TrainResult {
  TrainedModel model;
  std::vector<EpochStats> history;
  bool aborted = false;
  std::string message;
};

using Logger = std::function<void(const std::string&)>;

/// Initial model for `cfg`: random network (seeded), lambda_init.
TrainedModel initial_model(const TrainConfig& cfg, std::size_t height, std::size_t width);

TrainResult train(const std::vector<TrainSample>& data, const TrainConfig& cfg, const Logger& log = {});
/// Continues from `start` instead of a fresh model.
TrainResult train_from(TrainedModel start, const std::vector<TrainSample>& data, const TrainConfig& cfg,
                       const Logger& log = {});

/// Adam with bias correction, or plain SGD.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, std::size_t n);
  void step(std::vector<double>& theta, const std::vector<double>& grad);

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace mnm::train
