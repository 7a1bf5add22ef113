// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment commands: each reads its inputs from disk, runs one module and
// writes its artifacts into an output directory. Outputs depend only on the
// inputs, the seeds and the configuration.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "io/config.hpp"
#include "io/dataset.hpp"
#include "trainer/trainer.hpp"
#include "verify/verify.hpp"

namespace mnm::app {

using Logger = std::function<void(const std::string&)>;

/// %.17g, with "inf"/"-inf"/"nan" for non-finite values.
std::string csv_number(double v);

void gen_data(const io::DatasetSpec& spec, const std::filesystem::path& out_dir);

/// Writes checkpoint.json and history.csv (epoch, mean_loss, mean_L,
/// violation_rate, skipped). An aborted run still writes its history but no
/// checkpoint.
train::TrainResult train_command(const train::TrainConfig& cfg, const std::filesystem::path& data_dir,
                                 const std::filesystem::path& out_dir, const Logger& log = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<train::EpochStats>& history);

struct SampleMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
  double psnr_sense = 0.0;
  double ssim_sense = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Per-sample metrics of model reconstructions against the SENSE start.
std::vector<SampleMetrics> evaluate_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                                          std::vector<Tensor>* reconstructions = nullptr);

/// Writes recon_NNNN.mnm, recon_NNNN.png (per-image max normalization),
/// error_NNNN.png (|x* - x_ref| scaled 10x relative to max |x_ref|) and
/// metrics.csv.
std::vector<SampleMetrics> reconstruct_command(const std::filesystem::path& ckpt, const std::filesystem::path& data_dir,
                                               const std::filesystem::path& out_dir, const Logger& log = {});

enum class PerturbMode { adversarial, gaussian };
PerturbMode parse_perturb_mode(const std::string& s);

struct CurvePoint {
  double epsilon = 0.0;
  double mean_psnr = 0.0;
  double std_psnr = 0.0;
  double mean_drop = 0.0;  // mean of psnr_clean - psnr_perturbed
  std::size_t count = 0;
};

/// Writes reports.csv (one row per perturbation), curve.csv (PSNR against
/// the budget) and, in adversarial mode, the worst-case perturbations as
/// perturbation_sNNNN_eMM.mnm. Bounds use the model's target modulus.
std::vector<CurvePoint> eval_robust_command(const std::filesystem::path& ckpt, const std::filesystem::path& data_dir,
                                            PerturbMode mode, const std::vector<double>& eps_list,
                                            const io::RobustConfig& cfg, const std::filesystem::path& out_dir,
                                            const Logger& log = {});

/// Writes ratios.csv (sample, ratio) and histogram.csv (bin_lo, bin_hi,
/// count) of ||x_LS - x_ref|| / ||x_ref||; returns delta = max ratio.
double choose_delta_command(const std::filesystem::path& data_dir, double mu, const std::filesystem::path& out_dir,
                            std::size_t bins = 20);

/// Runs every suite; true iff all pass.
bool verify_command(const verify::VerifyConfig& cfg, const Logger& log = {});

}  // namespace mnm::app
