// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Uses only the C interface in mnmmol.h.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "mnmmol.h"

namespace {

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }
void print_line(const char* line, void*) {
  std::printf("%s\n", line);
  std::fflush(stdout);
}

int report(mnm_status s) {
  if (s == MNM_OK) return 0;
  std::fprintf(stderr, "mnmmol: %s: %s\n", mnm_status_string(s), mnm_last_error());
  return 1;
}

// Owns a config handle loaded from `path`, or the defaults if `path` is empty.
struct Config {
  mnm_config* handle = nullptr;
  ~Config() { mnm_config_free(handle); }
  mnm_status load(const std::string& path) {
    return path.empty() ? mnm_config_default(&handle) : mnm_config_load(path.c_str(), &handle);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally monotone deep-equilibrium MRI reconstruction"};
  app.set_version_flag("--version", std::string(mnm_version()));
  app.require_subcommand(1);

  mnm_dataset_spec spec;
  mnm_dataset_spec_default(&spec);
  std::vector<std::size_t> size{spec.height, spec.width};
  std::string mask = spec.mask_1d ? "1d" : "2d";
  std::string out, data, config_path, variant, ckpt, mode;
  std::vector<double> eps_list;
  double mu = 1e-2;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multicoil dataset");
  gen->add_option("--size", size, "Image size H,W")->delimiter(',')->expected(2);
  gen->add_option("--coils", spec.coils, "Number of coils")->check(CLI::PositiveNumber);
  gen->add_option("--accel", spec.accel, "Acceleration factor")->check(CLI::IsMember({4.0, 6.0}));
  gen->add_option("--count", spec.count, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", spec.sigma, "Noise standard deviation per real channel")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--mask", mask, "Mask kind")->check(CLI::IsMember({"1d", "2d"}));
  gen->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model and write checkpoint.json and history.csv");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--variant", variant, "Overrides train.variant")
      ->check(CLI::IsMember({"mnm-mol", "mol-l", "mol-sn"}));
  train->add_option("--out", out, "Output directory")->required();

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct a dataset with a trained model");
  recon->add_option("--ckpt", ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  recon->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  recon->add_option("--out", out, "Output directory")->required();

  auto* robust = app.add_subcommand("eval-robust", "Evaluate PSNR under measurement perturbations");
  robust->add_option("--ckpt", ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  robust->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  robust->add_option("--mode", mode, "Perturbation kind")->required()->check(
      CLI::IsMember({"adversarial", "gaussian"}));
  robust->add_option("--eps-list", eps_list, "Relative budgets, comma separated")->required()->delimiter(',');
  robust->add_option("--config", config_path, "Experiment config for the robust section")->check(CLI::ExistingFile);
  robust->add_option("--out", out, "Output directory")->required();

  auto* verify = app.add_subcommand("verify-lemmas", "Run the property suites; exit 0 iff all pass");
  verify->add_option("--config", config_path, "Experiment config for the verify section")->check(CLI::ExistingFile);

  auto* delta = app.add_subcommand("choose-delta", "Select the ball radius from SENSE errors");
  delta->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  delta->add_option("--mu", mu, "SENSE regularization")->check(CLI::PositiveNumber);
  delta->add_option("--out", out, "Output directory for ratios.csv and histogram.csv")->default_val(".");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    spec.height = size[0];
    spec.width = size[1];
    spec.mask_1d = mask == "1d" ? 1 : 0;
    return report(mnm_gen_data(&spec, out.c_str()));
  }
  if (train->parsed()) {
    Config cfg;
    if (mnm_status s = cfg.load(config_path)) return report(s);
    if (!variant.empty()) {
      if (mnm_status s = mnm_config_set_variant(cfg.handle, variant.c_str())) return report(s);
    }
    return report(mnm_train(cfg.handle, data.c_str(), out.c_str(), log_line, nullptr));
  }
  if (recon->parsed()) {
    double mean_psnr = 0.0;
    if (mnm_status s = mnm_reconstruct(ckpt.c_str(), data.c_str(), out.c_str(), log_line, nullptr, &mean_psnr)) {
      return report(s);
    }
    std::printf("mean psnr %.4f dB\n", mean_psnr);
    return 0;
  }
  if (robust->parsed()) {
    Config cfg;
    if (mnm_status s = cfg.load(config_path)) return report(s);
    return report(mnm_eval_robust(ckpt.c_str(), data.c_str(), mode.c_str(), eps_list.data(), eps_list.size(),
                                  cfg.handle, out.c_str(), log_line, nullptr));
  }
  if (verify->parsed()) {
    Config cfg;
    if (mnm_status s = cfg.load(config_path)) return report(s);
    int all_passed = 0;
    if (mnm_status s = mnm_verify_lemmas(cfg.handle, print_line, nullptr, &all_passed)) return report(s);
    std::printf("%s\n", all_passed ? "all suites passed" : "some suites FAILED");
    return all_passed ? 0 : 1;
  }
  if (delta->parsed()) {
    double d = 0.0;
    if (mnm_status s = mnm_choose_delta(data.c_str(), mu, out.c_str(), &d)) return report(s);
    std::printf("%.17g\n", d);
    return 0;
  }
  return 1;
}
