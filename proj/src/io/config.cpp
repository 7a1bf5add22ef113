// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/config.hpp"

#include <concepts>
#include <json.hpp>
#include <set>

#include "error.hpp"
#include "io/array_io.hpp"

namespace mnm::io {
namespace {

using json = nlohmann::json;

// Reads keys from one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + "must be a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + "must be an integer");
      out = v->get<int>();
    }
  }
  template <std::unsigned_integral U>
  void get(const char* key, U& out) {
    if (const json* v = find(key)) out = static_cast<U>(unsigned_value(*v, key));
  }
  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + "must be true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + "must be a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + "must be an array");
      out.clear();
      for (const json& e : *v) out.push_back(static_cast<std::size_t>(unsigned_value(e, key)));
    }
  }
  template <class F>
  void section(const char* key, F&& read) {
    if (const json* v = find(key)) {
      Section s(*v, path_ + key + ".");
      read(s);
      s.finish();
    }
  }
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown config key '" + path_ + item.key() + "'");
    }
  }

 private:
  const json* find(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }
  std::uint64_t unsigned_value(const json& v, const char* key) const {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(where(key) + "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::string where(const char* key = nullptr) const {
    return "config '" + path_ + (key ? key : "") + "': ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const char* optimizer_name(train::OptimizerKind k) { return k == train::OptimizerKind::sgd ? "sgd" : "adam"; }

train::OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return train::OptimizerKind::sgd;
  if (s == "adam") return train::OptimizerKind::adam;
  throw ConfigError("config 'train.optimizer': expected sgd or adam, got '" + s + "'");
}

const char* form_name(ops::ScoreForm f) { return f == ops::ScoreForm::direct ? "direct" : "residual"; }

ops::ScoreForm parse_form(const std::string& s) {
  if (s == "direct") return ops::ScoreForm::direct;
  if (s == "residual") return ops::ScoreForm::residual;
  throw ConfigError("config 'network.form': expected direct or residual, got '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  train::TrainConfig& t = c.train;
  Section root(j, "");
  root.section("train", [&](Section& s) {
    s.get("m", t.m);
    s.get("beta", t.beta);
    s.get("delta", t.delta);
    s.get("epochs", t.epochs);
    s.get("learning_rate", t.learning_rate);
    std::string opt = optimizer_name(t.optimizer);
    s.get("optimizer", opt);
    t.optimizer = parse_optimizer(opt);
    s.get("pga_steps", t.pga_steps);
    s.get("pga_step_size", t.pga_step_size);
    s.get("seed", t.seed);
    s.get("lambda_init", t.lambda_init);
    s.get("train_lambda", t.train_lambda);
    s.get("lambda_min", t.lambda_min);
    s.get("failure_budget", t.failure_budget);
    std::string variant = train::variant_name(t.variant);
    s.get("variant", variant);
    try {
      t.variant = train::parse_variant(variant);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config 'train.variant': ") + e.what());
    }
  });
  root.section("network", [&](Section& s) {
    s.get("channels", t.network.channels);
    s.get("kernel", t.network.kernel);
    std::string form = form_name(t.network.form);
    s.get("form", form);
    t.network.form = parse_form(form);
    s.get("init_scale", t.network.init_scale);
    s.get("output_scale", t.network.output_scale);
  });
  root.section("solver", [&](Section& s) {
    s.get("gamma", t.solver.gamma);
    s.get("lambda", t.solver.lambda);
    s.get("alpha", t.solver.alpha);
    s.get("tol", t.solver.tol);
    s.get("max_iter", t.solver.max_iter);
    s.get("backward_tol", t.solver.backward_tol);
    s.get("backward_max_iter", t.solver.backward_max_iter);
    s.get("inner_tol", t.solver.inner_tol);
    s.get("inner_max_iter", t.solver.inner_max_iter);
    s.get("m_assumed", t.solver.m_assumed);
  });
  root.section("sense", [&](Section& s) {
    s.get("mu", t.sense.mu);
    s.get("tol", t.sense.tol);
    s.get("max_iter", t.sense.max_iter);
  });
  root.section("robust", [&](Section& s) {
    s.get("steps", c.robust.adversarial.steps);
    s.get("step_fraction", c.robust.adversarial.step_fraction);
    s.get("gaussian_trials", c.robust.gaussian_trials);
    s.get("seed", c.robust.seed);
  });
  root.section("verify", [&](Section& s) {
    s.get("seed", c.verify.seed);
    s.get("image_size", c.verify.image_size);
    s.get("lemma_configs", c.verify.lemma_configs);
    s.get("pairs_per_config", c.verify.pairs_per_config);
    s.get("uniqueness_inits", c.verify.uniqueness_inits);
    s.get("robustness_trials", c.verify.robustness_trials);
    s.get("certify_steps", c.verify.certify_steps);
    s.get("delta", c.verify.delta);
  });
  root.finish();

  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (t.network.channels.size() < 2 || t.network.channels.front() != 2 || t.network.channels.back() != 2) {
    throw ConfigError("config 'network.channels': must start and end with 2");
  }
  if (c.robust.adversarial.steps < 0 || !(c.robust.adversarial.step_fraction > 0.0) || c.robust.gaussian_trials < 1) {
    throw ConfigError("config 'robust': steps >= 0, step_fraction > 0 and gaussian_trials >= 1 required");
  }
  const verify::VerifyConfig& v = c.verify;
  if (v.image_size < 8 || v.lemma_configs < 1 || v.pairs_per_config < 1 || v.uniqueness_inits < 2 ||
      v.robustness_trials < 1 || v.certify_steps < 1 || !(v.delta > 0.0)) {
    throw ConfigError("config 'verify': sizes and counts out of range");
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  const train::TrainConfig& t = c.train;
  json j;
  j["train"] = {{"m", t.m},
                {"beta", t.beta},
                {"delta", t.delta},
                {"epochs", t.epochs},
                {"learning_rate", t.learning_rate},
                {"optimizer", optimizer_name(t.optimizer)},
                {"pga_steps", t.pga_steps},
                {"pga_step_size", t.pga_step_size},
                {"seed", t.seed},
                {"lambda_init", t.lambda_init},
                {"train_lambda", t.train_lambda},
                {"lambda_min", t.lambda_min},
                {"failure_budget", t.failure_budget},
                {"variant", train::variant_name(t.variant)}};
  j["network"] = {{"channels", t.network.channels},
                  {"kernel", t.network.kernel},
                  {"form", form_name(t.network.form)},
                  {"init_scale", t.network.init_scale},
                  {"output_scale", t.network.output_scale}};
  j["solver"] = {{"gamma", t.solver.gamma},
                 {"lambda", t.solver.lambda},
                 {"alpha", t.solver.alpha},
                 {"tol", t.solver.tol},
                 {"max_iter", t.solver.max_iter},
                 {"backward_tol", t.solver.backward_tol},
                 {"backward_max_iter", t.solver.backward_max_iter},
                 {"inner_tol", t.solver.inner_tol},
                 {"inner_max_iter", t.solver.inner_max_iter},
                 {"m_assumed", t.solver.m_assumed}};
  j["sense"] = {{"mu", t.sense.mu}, {"tol", t.sense.tol}, {"max_iter", t.sense.max_iter}};
  j["robust"] = {{"steps", c.robust.adversarial.steps},
                 {"step_fraction", c.robust.adversarial.step_fraction},
                 {"gaussian_trials", c.robust.gaussian_trials},
                 {"seed", c.robust.seed}};
  j["verify"] = {{"seed", c.verify.seed},
                 {"image_size", c.verify.image_size},
                 {"lemma_configs", c.verify.lemma_configs},
                 {"pairs_per_config", c.verify.pairs_per_config},
                 {"uniqueness_inits", c.verify.uniqueness_inits},
                 {"robustness_trials", c.verify.robustness_trials},
                 {"certify_steps", c.verify.certify_steps},
                 {"delta", c.verify.delta}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

}  // namespace mnm::io
