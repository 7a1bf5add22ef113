// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "mnmmol.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <numeric>
#include <string>

#include "app/commands.hpp"
#include "error.hpp"
#include "io/array_io.hpp"
#include "io/checkpoint.hpp"
#include "io/config.hpp"
#include "io/dataset.hpp"
#include "io/metrics.hpp"
#include "mri/sense.hpp"

struct mnm_config {
  mnm::io::ExperimentConfig c;
};

struct mnm_dataset {
  std::vector<mnm::train::TrainSample> samples;
};

struct mnm_model {
  mnm::train::TrainedModel m;
};

namespace {

thread_local std::string g_last_error;

mnm_status status_of(mnm::ErrorKind k) {
  switch (k) {
    case mnm::ErrorKind::invalid_argument: return MNM_ERR_INVALID_ARGUMENT;
    case mnm::ErrorKind::shape_mismatch: return MNM_ERR_SHAPE;
    case mnm::ErrorKind::model_mismatch: return MNM_ERR_MODEL_MISMATCH;
    case mnm::ErrorKind::not_converged: return MNM_ERR_NOT_CONVERGED;
    case mnm::ErrorKind::diverged: return MNM_ERR_DIVERGED;
    case mnm::ErrorKind::io: return MNM_ERR_IO;
    case mnm::ErrorKind::format: return MNM_ERR_FORMAT;
    case mnm::ErrorKind::config: return MNM_ERR_CONFIG;
  }
  return MNM_ERR_INTERNAL;
}

mnm_status fail(mnm_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class F>
mnm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const mnm::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MNM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MNM_ERR_INTERNAL, e.what());
  }
}

#define MNM_REQUIRE(cond, what) \
  if (!(cond)) return fail(MNM_ERR_INVALID_ARGUMENT, what)

mnm::app::Logger logger(mnm_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mnm::Tensor image_from(const double* data, std::size_t h, std::size_t w) {
  return mnm::Tensor({2, h, w}, std::vector<double>(data, data + 2 * h * w));
}

mnm_status copy_image(const mnm::Tensor& t, double* out, std::size_t out_len) {
  if (out_len != t.size()) {
    return fail(MNM_ERR_SHAPE, "output buffer holds " + std::to_string(out_len) + " values, image has " +
                                   std::to_string(t.size()));
  }
  std::memcpy(out, t.data(), sizeof(double) * t.size());
  return MNM_OK;
}

}  // namespace

extern "C" {

const char* mnm_version(void) { return MNM_VERSION; }

const char* mnm_status_string(mnm_status s) {
  switch (s) {
    case MNM_OK: return "ok";
    case MNM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MNM_ERR_SHAPE: return "shape mismatch";
    case MNM_ERR_MODEL_MISMATCH: return "model mismatch";
    case MNM_ERR_NOT_CONVERGED: return "not converged";
    case MNM_ERR_DIVERGED: return "diverged";
    case MNM_ERR_IO: return "i/o error";
    case MNM_ERR_FORMAT: return "format error";
    case MNM_ERR_CONFIG: return "config error";
    case MNM_ERR_FAILED: return "failed";
    case MNM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mnm_last_error(void) { return g_last_error.c_str(); }

void mnm_string_free(char* s) { std::free(s); }
void mnm_buffer_free(void* p) { std::free(p); }

mnm_status mnm_config_default(mnm_config** out) {
  return guarded([&] {
    MNM_REQUIRE(out, "mnm_config_default: out is NULL");
    *out = new mnm_config{};
    return MNM_OK;
  });
}

mnm_status mnm_config_parse(const char* text, mnm_config** out) {
  return guarded([&] {
    MNM_REQUIRE(text && out, "mnm_config_parse: NULL argument");
    *out = new mnm_config{mnm::io::parse_config(text)};
    return MNM_OK;
  });
}

mnm_status mnm_config_load(const char* path, mnm_config** out) {
  return guarded([&] {
    MNM_REQUIRE(path && out, "mnm_config_load: NULL argument");
    *out = new mnm_config{mnm::io::load_config(path)};
    return MNM_OK;
  });
}

mnm_status mnm_config_serialize(const mnm_config* config, char** out) {
  return guarded([&] {
    MNM_REQUIRE(config && out, "mnm_config_serialize: NULL argument");
    *out = copy_string(mnm::io::serialize_config(config->c));
    return MNM_OK;
  });
}

mnm_status mnm_config_set_variant(mnm_config* config, const char* variant) {
  return guarded([&] {
    MNM_REQUIRE(config && variant, "mnm_config_set_variant: NULL argument");
    config->c.train.variant = mnm::train::parse_variant(variant);
    return MNM_OK;
  });
}

void mnm_config_free(mnm_config* config) { delete config; }

void mnm_dataset_spec_default(mnm_dataset_spec* spec) {
  if (!spec) return;
  const mnm::io::DatasetSpec d;
  *spec = mnm_dataset_spec{d.height, d.width, d.coils, d.accel, d.count, d.sigma, d.seed,
                           d.mask == mnm::mri::MaskKind::one_d ? 1 : 0};
}

mnm_status mnm_gen_data(const mnm_dataset_spec* spec, const char* out_dir) {
  return guarded([&] {
    MNM_REQUIRE(spec && out_dir, "mnm_gen_data: NULL argument");
    mnm::io::DatasetSpec s;
    s.height = spec->height;
    s.width = spec->width;
    s.coils = spec->coils;
    s.accel = spec->accel;
    s.count = spec->count;
    s.sigma = spec->sigma;
    s.seed = spec->seed;
    s.mask = spec->mask_1d ? mnm::mri::MaskKind::one_d : mnm::mri::MaskKind::two_d;
    mnm::app::gen_data(s, out_dir);
    return MNM_OK;
  });
}

mnm_status mnm_dataset_read(const char* dir, mnm_dataset** out) {
  return guarded([&] {
    MNM_REQUIRE(dir && out, "mnm_dataset_read: NULL argument");
    *out = new mnm_dataset{mnm::io::read_dataset(dir)};
    return MNM_OK;
  });
}

size_t mnm_dataset_size(const mnm_dataset* dataset) { return dataset ? dataset->samples.size() : 0; }

mnm_status mnm_dataset_image(const mnm_dataset* dataset, size_t index, double* out, size_t out_len) {
  return guarded([&] {
    MNM_REQUIRE(dataset && out, "mnm_dataset_image: NULL argument");
    MNM_REQUIRE(index < dataset->samples.size(), "mnm_dataset_image: index out of range");
    return copy_image(dataset->samples[index].x_ref, out, out_len);
  });
}

void mnm_dataset_free(mnm_dataset* dataset) { delete dataset; }

mnm_status mnm_model_load(const char* path, mnm_model** out) {
  return guarded([&] {
    MNM_REQUIRE(path && out, "mnm_model_load: NULL argument");
    *out = new mnm_model{mnm::io::load_checkpoint(path)};
    return MNM_OK;
  });
}

mnm_status mnm_model_save(const mnm_model* model, const char* path) {
  return guarded([&] {
    MNM_REQUIRE(model && path, "mnm_model_save: NULL argument");
    mnm::io::save_checkpoint(path, model->m);
    return MNM_OK;
  });
}

mnm_status mnm_model_info(const mnm_model* model, const char** variant, double* m, double* delta, double* lambda) {
  return guarded([&] {
    MNM_REQUIRE(model, "mnm_model_info: model is NULL");
    if (variant) *variant = mnm::train::variant_name(model->m.variant);
    if (m) *m = model->m.m;
    if (delta) *delta = model->m.delta;
    if (lambda) *lambda = model->m.deq.lambda;
    return MNM_OK;
  });
}

mnm_status mnm_model_reconstruct(const mnm_model* model, const mnm_dataset* dataset, size_t index, double* out,
                                 size_t out_len) {
  return guarded([&] {
    MNM_REQUIRE(model && dataset && out, "mnm_model_reconstruct: NULL argument");
    MNM_REQUIRE(index < dataset->samples.size(), "mnm_model_reconstruct: index out of range");
    const mnm::train::TrainSample& s = dataset->samples[index];
    const mnm::FixedPointResult r =
        model->m.deq.solve(s.mm, mnm::mri::apply_AH(s.b, s.mm), mnm::mri::sense_init(s.b, s.mm));
    const mnm_status st = copy_image(r.x_star, out, out_len);
    if (st == MNM_OK && !r.converged) {
      return fail(MNM_ERR_NOT_CONVERGED,
                  "mnm_model_reconstruct: no convergence in " + std::to_string(r.iterations) + " iterations");
    }
    return st;
  });
}

void mnm_model_free(mnm_model* model) { delete model; }

mnm_status mnm_array_write(const char* path, const double* data, const uint32_t* dims, size_t ndim) {
  return guarded([&] {
    MNM_REQUIRE(path && (dims || ndim == 0), "mnm_array_write: NULL argument");
    const mnm::Shape shape(dims, dims + ndim);
    const std::size_t n = mnm::shape_numel(shape);
    MNM_REQUIRE(data || n == 0, "mnm_array_write: data is NULL");
    mnm::io::write_array(path, mnm::Tensor(shape, std::vector<double>(data, data + n)));
    return MNM_OK;
  });
}

mnm_status mnm_array_read(const char* path, double** data, size_t* count, uint32_t** dims, size_t* ndim) {
  return guarded([&] {
    MNM_REQUIRE(path && data && count && dims && ndim, "mnm_array_read: NULL argument");
    const mnm::Tensor t = mnm::io::read_array(path);
    auto* d = static_cast<double*>(std::malloc(sizeof(double) * std::max<std::size_t>(t.size(), 1)));
    auto* s = static_cast<uint32_t*>(std::malloc(sizeof(uint32_t) * std::max<std::size_t>(t.rank(), 1)));
    if (!d || !s) {
      std::free(d);
      std::free(s);
      throw std::bad_alloc();
    }
    std::memcpy(d, t.data(), sizeof(double) * t.size());
    for (std::size_t i = 0; i < t.rank(); ++i) s[i] = static_cast<uint32_t>(t.dim(i));
    *data = d;
    *count = t.size();
    *dims = s;
    *ndim = t.rank();
    return MNM_OK;
  });
}

mnm_status mnm_psnr(const double* x, const double* ref, size_t height, size_t width, double* out) {
  return guarded([&] {
    MNM_REQUIRE(x && ref && out, "mnm_psnr: NULL argument");
    *out = mnm::io::psnr(image_from(x, height, width), image_from(ref, height, width));
    return MNM_OK;
  });
}

mnm_status mnm_ssim(const double* x, const double* ref, size_t height, size_t width, double* out) {
  return guarded([&] {
    MNM_REQUIRE(x && ref && out, "mnm_ssim: NULL argument");
    *out = mnm::io::ssim(image_from(x, height, width), image_from(ref, height, width));
    return MNM_OK;
  });
}

mnm_status mnm_train(const mnm_config* config, const char* data_dir, const char* out_dir, mnm_log_fn log,
                     void* user) {
  return guarded([&] {
    MNM_REQUIRE(config && data_dir && out_dir, "mnm_train: NULL argument");
    const mnm::train::TrainResult r = mnm::app::train_command(config->c.train, data_dir, out_dir, logger(log, user));
    if (r.aborted) return fail(MNM_ERR_FAILED, "training aborted: " + r.message);
    return MNM_OK;
  });
}

mnm_status mnm_reconstruct(const char* ckpt, const char* data_dir, const char* out_dir, mnm_log_fn log, void* user,
                           double* mean_psnr) {
  return guarded([&] {
    MNM_REQUIRE(ckpt && data_dir && out_dir, "mnm_reconstruct: NULL argument");
    const auto metrics = mnm::app::reconstruct_command(ckpt, data_dir, out_dir, logger(log, user));
    if (mean_psnr) {
      double s = 0.0;
      for (const auto& m : metrics) s += m.psnr;
      *mean_psnr = metrics.empty() ? 0.0 : s / static_cast<double>(metrics.size());
    }
    return MNM_OK;
  });
}

mnm_status mnm_eval_robust(const char* ckpt, const char* data_dir, const char* mode, const double* eps, size_t n_eps,
                           const mnm_config* config, const char* out_dir, mnm_log_fn log, void* user) {
  return guarded([&] {
    MNM_REQUIRE(ckpt && data_dir && mode && eps && out_dir, "mnm_eval_robust: NULL argument");
    const mnm::io::RobustConfig rc = config ? config->c.robust : mnm::io::RobustConfig{};
    mnm::app::eval_robust_command(ckpt, data_dir, mnm::app::parse_perturb_mode(mode),
                                  std::vector<double>(eps, eps + n_eps), rc, out_dir, logger(log, user));
    return MNM_OK;
  });
}

mnm_status mnm_verify_lemmas(const mnm_config* config, mnm_log_fn log, void* user, int* all_passed) {
  return guarded([&] {
    MNM_REQUIRE(all_passed, "mnm_verify_lemmas: all_passed is NULL");
    const mnm::verify::VerifyConfig vc = config ? config->c.verify : mnm::verify::VerifyConfig{};
    *all_passed = mnm::app::verify_command(vc, logger(log, user)) ? 1 : 0;
    return MNM_OK;
  });
}

mnm_status mnm_choose_delta(const char* data_dir, double mu, const char* out_dir, double* delta) {
  return guarded([&] {
    MNM_REQUIRE(data_dir && out_dir && delta, "mnm_choose_delta: NULL argument");
    *delta = mnm::app::choose_delta_command(data_dir, mu, out_dir);
    return MNM_OK;
  });
}

}  // extern "C"
