// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <variant>

#include "diffgraph/ops.hpp"
#include "error.hpp"
#include "mri/generators.hpp"
#include "operators/combined.hpp"
#include "operators/spectral.hpp"

namespace mnm::train {
namespace {

const ops::ScoreNetwork& network_of(const TrainedModel& model) {
  const auto* net = std::get_if<ops::ScoreNetwork>(&model.deq.score);
  if (!net) throw InvalidArgument("trainer: model score is not a network");
  return *net;
}

ops::OperatorBinding bind_model(const TrainedModel& model, ad::Graph& g, bool params_grad, bool lambda_grad) {
  return ops::OperatorBinding{ops::bind_parameters(model.deq.score, g, params_grad),
                              g.leaf(Tensor::scalar(model.deq.lambda), lambda_grad)};
}

std::vector<double> flatten(const std::vector<Tensor>& ts) {
  std::vector<double> out;
  for (const Tensor& t : ts) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::mnm_mol: return "mnm-mol";
    case Variant::mol_l: return "mol-l";
    case Variant::mol_sn: return "mol-sn";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "mnm-mol") return Variant::mnm_mol;
  if (s == "mol-l") return Variant::mol_l;
  if (s == "mol-sn") return Variant::mol_sn;
  throw InvalidArgument("unknown variant '" + s + "' (expected mnm-mol, mol-l or mol-sn)");
}

SolverKind solver_for(Variant v) {
  return v == Variant::mnm_mol ? SolverKind::steepest_descent : SolverKind::forward_backward;
}

void TrainConfig::validate() const {
  if (!(m > 0.0 && m < 1.0)) throw InvalidArgument("TrainConfig: m must be in (0, 1)");
  if (!(beta >= 0.0)) throw InvalidArgument("TrainConfig: beta must be >= 0");
  if (epochs < 0) throw InvalidArgument("TrainConfig: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("TrainConfig: learning rate must be > 0");
  if (pga_steps < 1) throw InvalidArgument("TrainConfig: pga_steps must be >= 1");
  if (!(pga_step_size > 0.0)) throw InvalidArgument("TrainConfig: pga_step_size must be > 0");
  if (!(lambda_init > 0.0) || !(lambda_min > 0.0)) throw InvalidArgument("TrainConfig: lambda must be > 0");
  if (!(failure_budget >= 0.0 && failure_budget <= 1.0)) {
    throw InvalidArgument("TrainConfig: failure budget must be in [0, 1]");
  }
  if (variant != Variant::mnm_mol && network.form != ops::ScoreForm::residual) {
    throw InvalidArgument("TrainConfig: MOL variants need the residual score form");
  }
  solver.validate();
}

std::vector<double> sense_error_ratios(const std::vector<TrainSample>& data, const mri::SenseOptions& sense) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const TrainSample& s : data) {
    const Tensor x_ls = mri::sense_init(s.b, s.mm, sense);
    out.push_back(norm(x_ls - s.x_ref) / norm(s.x_ref));
  }
  return out;
}

double choose_delta(const std::vector<TrainSample>& data, double mu) {
  if (data.empty()) throw InvalidArgument("choose_delta: empty dataset");
  mri::SenseOptions opts;
  opts.mu = mu;
  const std::vector<double> r = sense_error_ratios(data, opts);
  return *std::max_element(r.begin(), r.end());
}

ad::Var constrained_operator(const TrainedModel& model, const mri::MeasurementModel& mm, ad::Var z,
                             const ops::OperatorBinding& b) {
  if (model.variant == Variant::mnm_mol) {
    const ops::CombinedOperator op(model.deq.score, mm, model.deq.lambda);
    return ops::residual_H(op, z, b);
  }
  return network_of(model).apply_cnn(z, b.params);
}

lip::DiffOperator frozen_operator(const TrainedModel& model, const mri::MeasurementModel& mm) {
  return [&model, &mm](ad::Var z) {
    const ops::OperatorBinding b = bind_model(model, z.graph(), false, false);
    return constrained_operator(model, mm, z, b);
  };
}

SampleResult loss_and_grad(const TrainSample& s, const Tensor& x0, const Tensor& aHb, const TrainedModel& model,
                           const TrainConfig& cfg, std::uint64_t pga_seed) {
  const DeqModel& deq = model.deq;
  const FixedPointResult fw = deq.solve(s.mm, aHb, x0);
  if (!fw.converged) {
    throw ConvergenceError("forward iteration did not converge in " + std::to_string(fw.iterations) + " steps",
                           fw.residuals.empty() ? 0.0 : fw.residuals.back(), fw.residuals);
  }
  SampleResult res;
  res.x_star = fw.x_star;
  res.forward_iterations = fw.iterations;
  const Tensor diff = fw.x_star - s.x_ref;
  res.data_loss = squared_norm(diff);
  DeqGradients g = deq.backward(s.mm, fw.x_star, aHb, 2.0 * diff);
  res.grad_params = std::move(g.params);
  res.grad_lambda = g.lambda;

  const lip::BallSpec ball{fw.x_star, model.delta};
  const lip::LipschitzEstimate est =
      lip::estimate_local_lipschitz(frozen_operator(model, s.mm), ball, cfg.pga_steps, cfg.pga_step_size, pga_seed);
  res.L = est.L;

  const double beta = cfg.effective_beta();
  const double excess = est.L - cfg.T();
  if (beta > 0.0 && excess > 0.0) {
    res.penalty = beta * excess * excess;
    ad::Graph pg;
    const ops::OperatorBinding b = bind_model(model, pg, true, cfg.train_lambda);
    const ad::Var ratio = lip::lipschitz_ratio(
        [&](ad::Var z) { return constrained_operator(model, s.mm, z, b); }, pg.constant(est.z1),
        pg.constant(est.z2));
    std::vector<ad::Var> leaves = b.params;
    leaves.push_back(b.lambda);
    const std::vector<Tensor> pgrads = pg.grad(ratio, leaves);
    const double scale = 2.0 * beta * excess;
    for (std::size_t i = 0; i < res.grad_params.size(); ++i) res.grad_params[i].axpy(scale, pgrads[i]);
    res.grad_lambda += scale * pgrads.back().item();
  }
  res.loss = res.data_loss + res.penalty;
  return res;
}

TrainedModel initial_model(const TrainConfig& cfg, std::size_t height, std::size_t width) {
  TrainedModel model;
  model.variant = cfg.variant;
  model.m = cfg.m;
  model.delta = cfg.delta;
  ops::ScoreNetwork net = ops::ScoreNetwork::random(cfg.network, mri::derive_seed(cfg.seed, 0));
  if (cfg.variant == Variant::mol_sn) net = ops::spectral_normalize(net, cfg.T(), height, width);
  model.deq.solver = solver_for(cfg.variant);
  model.deq.score = std::move(net);
  model.deq.lambda = cfg.lambda_init;
  model.deq.cfg = cfg.solver;
  return model;
}

TrainResult train(const std::vector<TrainSample>& data, const TrainConfig& cfg, const Logger& log) {
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  return train_from(initial_model(cfg, data.front().mm.height(), data.front().mm.width()), data, cfg, log);
}

TrainResult train_from(TrainedModel start, const std::vector<TrainSample>& data, const TrainConfig& cfg,
                       const Logger& log) {
  cfg.validate();
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  TrainResult out;
  out.model = std::move(start);
  TrainedModel& model = out.model;
  if (!(model.delta > 0.0)) model.delta = choose_delta(data, cfg.sense.mu);

  const std::size_t n = data.size();
  std::vector<Tensor> x0(n), aHb(n);
  for (std::size_t k = 0; k < n; ++k) {
    x0[k] = mri::sense_init(data[k].b, data[k].mm, cfg.sense);
    aHb[k] = mri::apply_AH(data[k].b, data[k].mm);
  }
  const std::size_t height = data.front().mm.height(), width = data.front().mm.width();

  auto& net = std::get<ops::ScoreNetwork>(model.deq.score);
  const std::size_t n_params = net.parameter_count();
  Optimizer opt(cfg.optimizer, cfg.learning_rate, n_params + 1);
  ops::SpectralState sn_state;
  const auto budget = static_cast<int>(std::floor(cfg.failure_budget * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mri::derive_seed(cfg.seed, 0x100000u + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats st;
    st.epoch = epoch;
    int used = 0, violations = 0;
    for (std::size_t idx : order) {
      const std::uint64_t pga_seed = mri::derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch) * n + idx);
      SampleResult r;
      try {
        r = loss_and_grad(data[idx], x0[idx], aHb[idx], model, cfg, pga_seed);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_converged && e.kind() != ErrorKind::diverged) throw;
        ++st.skipped;
        if (log) log("epoch " + std::to_string(epoch) + ": skipped sample " + std::to_string(idx) + ": " + e.what());
        if (st.skipped > budget) {
          out.aborted = true;
          out.message = "epoch " + std::to_string(epoch) + ": " + std::to_string(st.skipped) + " of " +
                        std::to_string(n) + " samples failed, above the failure budget";
          break;
        }
        continue;
      }
      ++used;
      st.mean_loss += r.loss;
      st.mean_L += r.L;
      if (r.L > cfg.T()) ++violations;

      std::vector<double> theta = net.theta();
      theta.push_back(model.deq.lambda);
      std::vector<double> grad = flatten(r.grad_params);
      grad.push_back(cfg.train_lambda ? r.grad_lambda : 0.0);
      opt.step(theta, grad);
      model.deq.lambda = std::max(theta.back(), cfg.lambda_min);
      theta.pop_back();
      net.set_theta(theta);
      if (model.variant == Variant::mol_sn) net = ops::spectral_normalize(net, cfg.T(), height, width, &sn_state);
    }
    if (used > 0) {
      st.mean_loss /= used;
      st.mean_L /= used;
      st.violation_rate = static_cast<double>(violations) / used;
    }
    out.history.push_back(st);
    if (log) {
      log("epoch " + std::to_string(epoch) + " loss " + std::to_string(st.mean_loss) + " L " +
          std::to_string(st.mean_L) + " violations " + std::to_string(st.violation_rate) + " lambda " +
          std::to_string(model.deq.lambda));
    }
    if (out.aborted) break;
  }
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, double lr, std::size_t n) : kind_(kind), lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

void Optimizer::step(std::vector<double>& theta, const std::vector<double>& grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size()) throw ShapeError("Optimizer: parameter size changed");
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr_ * grad[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    theta[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

}  // namespace mnm::train
