// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion. Progress goes to stderr;
// the criteria lines go to stdout and, with --report PATH, to a file.
// Exits 0 once every criterion has been evaluated, whatever the outcome.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "io/array_io.hpp"
#include "io/checkpoint.hpp"
#include "io/dataset.hpp"
#include "io/metrics.hpp"
#include "mri/generators.hpp"
#include "mri/sense.hpp"
#include "robustness/robustness.hpp"
#include "trainer/trainer.hpp"
#include "verify/verify.hpp"

namespace fs = std::filesystem;
using namespace mnm;

namespace {

constexpr std::uint64_t kTrainSeed = 7;
constexpr int kEpochs = 10;
constexpr double kPenaltyBeta = 30.0;
constexpr double kMu = 1e-2;
constexpr double kAdversarialEps = 0.1;
constexpr double kPsnrGap = 0.3;
constexpr double kDropGap = 1.0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

void progress(const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); }

struct Criterion {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

Criterion from_suites(int id, const std::string& title, const std::vector<verify::SuiteResult>& suites) {
  Criterion c{id, title, true, ""};
  for (const verify::SuiteResult& s : suites) {
    c.passed = c.passed && s.passed;
    if (!c.detail.empty()) c.detail += "; ";
    c.detail += s.name + (s.passed ? " ok" : " FAILED") + " (" + s.detail + ")";
    progress(fmt("  %s %s in %.1f s", s.name.c_str(), s.passed ? "passed" : "failed", s.seconds));
  }
  return c;
}

double mean_psnr(const train::TrainedModel& model, const std::vector<train::TrainSample>& data, int* failures) {
  double sum = 0.0;
  for (const train::TrainSample& s : data) {
    try {
      const FixedPointResult r = model.deq.solve(s.mm, mri::apply_AH(s.b, s.mm), mri::sense_init(s.b, s.mm));
      if (!r.converged) ++*failures;
      sum += io::psnr(r.x_star, s.x_ref);
    } catch (const Error&) {
      ++*failures;
    }
  }
  return sum / static_cast<double>(data.size());
}

double mean_sense_psnr(const std::vector<train::TrainSample>& data) {
  double sum = 0.0;
  for (const train::TrainSample& s : data) sum += io::psnr(mri::sense_init(s.b, s.mm), s.x_ref);
  return sum / static_cast<double>(data.size());
}

// Mean clean-minus-perturbed PSNR under the adversarial search at relative budget eps.
double mean_adversarial_drop(const train::TrainedModel& model, const std::vector<train::TrainSample>& data, double eps,
                             int* failures) {
  double drop = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const train::TrainSample& s = data[k];
    const robust::CleanSolve clean =
        robust::CleanSolve::solve(model.deq, s.mm, s.b, s.x_ref, mri::sense_init(s.b, s.mm));
    const robust::PerturbationReport r =
        robust::adversarial_perturb(clean, eps, model.m, {}, mri::derive_seed(kTrainSeed, k));
    if (!r.converged) ++*failures;
    drop += r.psnr_clean - r.psnr_perturbed;
  }
  return drop / static_cast<double>(data.size());
}

train::TrainedModel train_variant(const std::vector<train::TrainSample>& data, train::Variant v, double beta) {
  train::TrainConfig cfg;
  cfg.variant = v;
  cfg.beta = beta;
  cfg.epochs = kEpochs;
  cfg.seed = kTrainSeed;
  const auto t0 = std::chrono::steady_clock::now();
  train::TrainResult r = train::train(data, cfg, [&](const std::string& line) {
    progress(std::string("  ") + train::variant_name(v) + " beta " + fmt("%g", beta) + ": " + line);
  });
  if (r.aborted) throw std::runtime_error(std::string(train::variant_name(v)) + ": " + r.message);
  progress(fmt("  trained %s (beta %g) in %.0f s", train::variant_name(v), beta,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
  return std::move(r.model);
}

bool same_files(const fs::path& a, const fs::path& b) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb || na.empty()) return false;
  for (const std::string& n : na) {
    if (io::read_file(a / n) != io::read_file(b / n)) return false;
  }
  return true;
}

Criterion determinism(const verify::VerifyConfig& vc) {
  Criterion c{9, "containers round-trip and runs are deterministic", false, ""};
  const verify::SuiteResult rt = verify::container_roundtrip(vc);

  const fs::path dir = fs::temp_directory_path() / "mnm_acceptance";
  fs::remove_all(dir);
  io::DatasetSpec spec;
  spec.height = spec.width = 16;
  spec.count = 3;
  spec.seed = 21;
  io::write_dataset(dir / "a", spec, io::generate_dataset(spec));
  io::write_dataset(dir / "b", spec, io::generate_dataset(spec));
  const bool data_same = same_files(dir / "a", dir / "b");

  const std::vector<train::TrainSample> data = io::read_dataset(dir / "a");
  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 5;
  cfg.network.channels = {2, 4, 2};
  const train::TrainResult t1 = train::train(data, cfg);
  const train::TrainResult t2 = train::train(data, cfg);
  const bool train_same = !t1.aborted && !t2.aborted &&
                          io::encode_checkpoint(t1.model) == io::encode_checkpoint(t2.model) &&
                          t1.history.size() == t2.history.size() &&
                          t1.history.back().mean_loss == t2.history.back().mean_loss;

  const std::vector<verify::SuiteResult> v1 = verify::run_all(vc), v2 = verify::run_all(vc);
  bool verify_same = v1.size() == v2.size();
  for (std::size_t i = 0; verify_same && i < v1.size(); ++i) {
    verify_same = v1[i].passed == v2[i].passed && v1[i].detail == v2[i].detail;
  }
  fs::remove_all(dir);

  c.passed = rt.passed && data_same && train_same && verify_same;
  c.detail = "containers " + std::string(rt.passed ? "ok" : "FAILED") + " (" + rt.detail + "); gen-data " +
             (data_same ? "identical" : "DIFFERS") + "; train " + (train_same ? "identical" : "DIFFERS") +
             "; verify " + (verify_same ? "identical" : "DIFFERS");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::string report_path;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--report") == 0 && a + 1 < argc) report_path = argv[++a];
  }
  try {
    const auto start = std::chrono::steady_clock::now();
    const verify::VerifyConfig vc;
    std::vector<Criterion> out;

    io::DatasetSpec spec;
    spec.count = 50;
    spec.seed = 1;
    const std::vector<train::TrainSample> train_set = io::generate_dataset(spec);
    spec.count = 10;
    spec.seed = 2;
    const std::vector<train::TrainSample> test_set = io::generate_dataset(spec);

    progress("training models (32x32, 50 train / 10 test samples)");
    const train::TrainedModel mnm = train_variant(train_set, train::Variant::mnm_mol, kPenaltyBeta);
    const train::TrainedModel mol_l = train_variant(train_set, train::Variant::mol_l, kPenaltyBeta);
    const train::TrainedModel mol_sn = train_variant(train_set, train::Variant::mol_sn, 0.0);
    const train::TrainedModel unconstrained = train_variant(train_set, train::Variant::mnm_mol, 0.0);

    progress("criterion 1");
    out.push_back(from_suites(1, "local Lipschitz bound implies local monotonicity", {verify::lemma_monotone(vc)}));
    progress("criterion 2");
    out.push_back(from_suites(2, "linear convergence inside the ball",
                              {verify::convergence_linear(vc), verify::convergence_model(mnm, test_set, vc)}));
    progress("criterion 3");
    out.push_back(from_suites(3, "unique fixed point inside the ball", {verify::local_uniqueness(mnm, test_set, vc)}));
    progress("criterion 4");
    out.push_back(from_suites(4, "perturbation bound ||Delta|| <= ||A^H n|| / m",
                              {verify::robustness_model(mnm, test_set, vc), verify::robustness_linear(vc)}));
    progress("criterion 5");
    out.push_back(from_suites(5, "implicit gradients match unrolled differentiation", {verify::implicit_gradient(vc)}));

    progress("criterion 6");
    {
      int failures = 0;
      const double p_sense = mean_sense_psnr(test_set);
      const double p_sn = mean_psnr(mol_sn, test_set, &failures);
      const double p_l = mean_psnr(mol_l, test_set, &failures);
      const double p_mnm = mean_psnr(mnm, test_set, &failures);
      const bool ordered = p_sn - p_sense >= kPsnrGap && p_l - p_sn >= kPsnrGap && p_mnm - p_l >= kPsnrGap;
      out.push_back({6, "test PSNR ordering SENSE < MOL-SN < MOL-L < MnM-MOL", ordered && failures == 0,
                     fmt("SENSE %.3f, MOL-SN %.3f, MOL-L %.3f, MnM-MOL %.3f dB; required gap %.1f dB; "
                         "%d unconverged solves",
                         p_sense, p_sn, p_l, p_mnm, kPsnrGap, failures)});
    }

    progress("criterion 7");
    {
      int failures = 0;
      const double d_mnm = mean_adversarial_drop(mnm, test_set, kAdversarialEps, &failures);
      const double d_free = mean_adversarial_drop(unconstrained, test_set, kAdversarialEps, &failures);
      out.push_back({7, "penalty reduces the adversarial PSNR drop", d_free - d_mnm >= kDropGap && failures == 0,
                     fmt("mean drop at eps %.2f: beta 0 %.3f dB, beta %g %.3f dB, difference %.3f dB "
                         "(required %.1f); %d unconverged solves",
                         kAdversarialEps, d_free, kPenaltyBeta, d_mnm, d_free - d_mnm, kDropGap, failures)});
    }

    progress("criterion 8");
    out.push_back(from_suites(8, "ball radius selection covers held-out samples",
                              {verify::delta_selection(train_set, kMu, &test_set)}));

    progress("criterion 9");
    out.push_back(determinism(vc));

    std::string text;
    for (const Criterion& c : out) {
      text += fmt("[%s] %d %s: ", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str()) + c.detail + "\n";
    }
    std::fputs(text.c_str(), stdout);
    progress(fmt("total %.0f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()));
    if (!report_path.empty()) io::write_file(report_path, text);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
