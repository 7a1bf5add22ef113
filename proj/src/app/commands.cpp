// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "io/array_io.hpp"
#include "io/checkpoint.hpp"
#include "io/metrics.hpp"
#include "io/png.hpp"
#include "mri/generators.hpp"
#include "mri/sense.hpp"
#include "robustness/robustness.hpp"

namespace mnm::app {
namespace {

namespace fs = std::filesystem;

std::string numbered(const char* prefix, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu.%s", prefix, k, ext);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) { io::write_file(path, text); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void gen_data(const io::DatasetSpec& spec, const fs::path& out_dir) {
  io::write_dataset(out_dir, spec, io::generate_dataset(spec));
}

void write_history_csv(const fs::path& path, const std::vector<train::EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,mean_loss,mean_L,violation_rate,skipped\n";
  for (const train::EpochStats& e : history) {
    os << e.epoch << ',' << csv_number(e.mean_loss) << ',' << csv_number(e.mean_L) << ','
       << csv_number(e.violation_rate) << ',' << e.skipped << '\n';
  }
  write_text(path, os.str());
}

train::TrainResult train_command(const train::TrainConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                                 const Logger& log) {
  const std::vector<train::TrainSample> data = io::read_dataset(data_dir);
  ensure_dir(out_dir);
  train::TrainResult r = train::train(data, cfg, log);
  write_history_csv(out_dir / "history.csv", r.history);
  if (!r.aborted) io::save_checkpoint(out_dir / "checkpoint.json", r.model);
  return r;
}

std::vector<SampleMetrics> evaluate_model(const train::TrainedModel& model, const std::vector<train::TrainSample>& data,
                                          std::vector<Tensor>* reconstructions) {
  std::vector<SampleMetrics> out;
  for (const train::TrainSample& s : data) {
    const Tensor x0 = mri::sense_init(s.b, s.mm);
    const FixedPointResult fw = model.deq.solve(s.mm, mri::apply_AH(s.b, s.mm), x0);
    SampleMetrics m;
    m.psnr = io::psnr(fw.x_star, s.x_ref);
    m.ssim = io::ssim(fw.x_star, s.x_ref);
    m.psnr_sense = io::psnr(x0, s.x_ref);
    m.ssim_sense = io::ssim(x0, s.x_ref);
    m.iterations = fw.iterations;
    m.converged = fw.converged;
    out.push_back(m);
    if (reconstructions) reconstructions->push_back(fw.x_star);
  }
  return out;
}

std::vector<SampleMetrics> reconstruct_command(const fs::path& ckpt, const fs::path& data_dir, const fs::path& out_dir,
                                               const Logger& log) {
  const train::TrainedModel model = io::load_checkpoint(ckpt);
  const std::vector<train::TrainSample> data = io::read_dataset(data_dir);
  ensure_dir(out_dir);
  std::vector<Tensor> recon;
  const std::vector<SampleMetrics> metrics = evaluate_model(model, data, &recon);
  std::ostringstream os;
  os << "sample,psnr,ssim,psnr_sense,ssim_sense,iterations,converged\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const SampleMetrics& m = metrics[k];
    io::write_array(out_dir / numbered("recon", k, "mnm"), recon[k]);
    io::write_png(out_dir / numbered("recon", k, "png"), io::display_magnitude(recon[k]));
    const Tensor ref_mag = magnitude(data[k].x_ref);
    const double ref_peak = *std::max_element(ref_mag.values().begin(), ref_mag.values().end());
    io::write_png(out_dir / numbered("error", k, "png"),
                  io::display_magnitude(recon[k] - data[k].x_ref, ref_peak, 10.0));
    os << k << ',' << csv_number(m.psnr) << ',' << csv_number(m.ssim) << ',' << csv_number(m.psnr_sense) << ','
       << csv_number(m.ssim_sense) << ',' << m.iterations << ',' << (m.converged ? 1 : 0) << '\n';
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "sample %zu: psnr %.3f dB (SENSE %.3f), ssim %.4f, %d iterations%s", k, m.psnr,
                    m.psnr_sense, m.ssim, m.iterations, m.converged ? "" : " (not converged)");
      log(buf);
    }
  }
  write_text(out_dir / "metrics.csv", os.str());
  return metrics;
}

PerturbMode parse_perturb_mode(const std::string& s) {
  if (s == "adversarial") return PerturbMode::adversarial;
  if (s == "gaussian") return PerturbMode::gaussian;
  throw InvalidArgument("unknown perturbation mode '" + s + "' (expected adversarial or gaussian)");
}

std::vector<CurvePoint> eval_robust_command(const fs::path& ckpt, const fs::path& data_dir, PerturbMode mode,
                                            const std::vector<double>& eps_list, const io::RobustConfig& cfg,
                                            const fs::path& out_dir, const Logger& log) {
  if (eps_list.empty()) throw InvalidArgument("eval-robust: empty epsilon list");
  for (double e : eps_list) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InvalidArgument("eval-robust: epsilon must be finite and >= 0");
  }
  const train::TrainedModel model = io::load_checkpoint(ckpt);
  const std::vector<train::TrainSample> data = io::read_dataset(data_dir);
  ensure_dir(out_dir);

  std::vector<std::vector<double>> psnr(eps_list.size()), drop(eps_list.size());
  std::ostringstream os;
  os << "sample,epsilon,trial,psnr_clean,psnr_perturbed,delta_norm,aHn_norm,bound,converged,bound_satisfied\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const train::TrainSample& s = data[k];
    const robust::CleanSolve clean =
        robust::CleanSolve::solve(model.deq, s.mm, s.b, s.x_ref, mri::sense_init(s.b, s.mm));
    std::vector<std::vector<robust::PerturbationReport>> reports(eps_list.size());
    if (mode == PerturbMode::adversarial) {
      const auto sweep = robust::adversarial_sweep(clean, eps_list, model.m, cfg.adversarial,
                                                   mri::derive_seed(cfg.seed, k));
      for (std::size_t e = 0; e < eps_list.size(); ++e) {
        reports[e].push_back(sweep[e]);
        char name[64];
        std::snprintf(name, sizeof(name), "perturbation_s%04zu_e%02zu.mnm", k, e);
        io::write_array(out_dir / name, sweep[e].n_star);
      }
    } else {
      for (std::size_t e = 0; e < eps_list.size(); ++e) {
        reports[e] = robust::gaussian_perturb(clean, eps_list[e], model.m, cfg.gaussian_trials,
                                              mri::derive_seed(cfg.seed, k * eps_list.size() + e));
      }
    }
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      for (std::size_t t = 0; t < reports[e].size(); ++t) {
        const robust::PerturbationReport& r = reports[e][t];
        os << k << ',' << csv_number(r.epsilon) << ',' << t << ',' << csv_number(r.psnr_clean) << ','
           << csv_number(r.psnr_perturbed) << ',' << csv_number(r.delta_norm) << ',' << csv_number(r.aHn_norm) << ','
           << csv_number(r.bound) << ',' << (r.converged ? 1 : 0) << ',' << (r.bound_satisfied ? 1 : 0) << '\n';
        psnr[e].push_back(r.psnr_perturbed);
        drop[e].push_back(r.psnr_clean - r.psnr_perturbed);
      }
    }
    if (log) log("sample " + std::to_string(k) + " done");
  }
  write_text(out_dir / "reports.csv", os.str());

  std::vector<CurvePoint> curve;
  std::ostringstream cs;
  cs << "epsilon,mean_psnr,std_psnr,mean_drop,count\n";
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    CurvePoint p{eps_list[e], mean(psnr[e]), stddev(psnr[e]), mean(drop[e]), psnr[e].size()};
    cs << csv_number(p.epsilon) << ',' << csv_number(p.mean_psnr) << ',' << csv_number(p.std_psnr) << ','
       << csv_number(p.mean_drop) << ',' << p.count << '\n';
    curve.push_back(p);
  }
  write_text(out_dir / "curve.csv", cs.str());
  return curve;
}

double choose_delta_command(const fs::path& data_dir, double mu, const fs::path& out_dir, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("choose-delta: bins must be >= 1");
  const std::vector<train::TrainSample> data = io::read_dataset(data_dir);
  const double delta = train::choose_delta(data, mu);
  mri::SenseOptions opts;
  opts.mu = mu;
  const std::vector<double> ratios = train::sense_error_ratios(data, opts);
  ensure_dir(out_dir);

  std::ostringstream rs;
  rs << "sample,ratio\n";
  for (std::size_t k = 0; k < ratios.size(); ++k) rs << k << ',' << csv_number(ratios[k]) << '\n';
  write_text(out_dir / "ratios.csv", rs.str());

  std::vector<std::size_t> counts(bins, 0);
  const double width = delta > 0.0 ? delta / static_cast<double>(bins) : 1.0;
  for (double r : ratios) {
    const auto b = static_cast<std::size_t>(r / width);
    ++counts[std::min(b, bins - 1)];
  }
  std::ostringstream hs;
  hs << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < bins; ++b) {
    hs << csv_number(width * static_cast<double>(b)) << ',' << csv_number(width * static_cast<double>(b + 1)) << ','
       << counts[b] << '\n';
  }
  write_text(out_dir / "histogram.csv", hs.str());
  return delta;
}

bool verify_command(const verify::VerifyConfig& cfg, const Logger& log) {
  const std::vector<verify::SuiteResult> results = verify::run_all(cfg, log);
  return std::all_of(results.begin(), results.end(), [](const verify::SuiteResult& r) { return r.passed; });
}

}  // namespace mnm::app
