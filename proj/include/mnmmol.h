// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// C interface to the mnmmol library. Every fallible call returns an
// mnm_status; on failure mnm_last_error() describes the problem for the
// calling thread. Handles are opaque and released with their _free function.
// Images are [2, H, W] row-major doubles (real plane, then imaginary plane).

#ifndef MNMMOL_H
#define MNMMOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MNM_API __declspec(dllexport)
#else
#define MNM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mnm_status {
  MNM_OK = 0,
  MNM_ERR_INVALID_ARGUMENT = 1,
  MNM_ERR_SHAPE = 2,
  MNM_ERR_MODEL_MISMATCH = 3,
  MNM_ERR_NOT_CONVERGED = 4,
  MNM_ERR_DIVERGED = 5,
  MNM_ERR_IO = 6,
  MNM_ERR_FORMAT = 7,
  MNM_ERR_CONFIG = 8,
  MNM_ERR_FAILED = 9,  // the command ran but did not succeed (aborted training)
  MNM_ERR_INTERNAL = 10
} mnm_status;

MNM_API const char* mnm_version(void);
MNM_API const char* mnm_status_string(mnm_status status);
// Message of the last failed call on this thread; "" if none.
MNM_API const char* mnm_last_error(void);

// Receives one progress line per call.
typedef void (*mnm_log_fn)(const char* line, void* user);

MNM_API void mnm_string_free(char* s);
MNM_API void mnm_buffer_free(void* p);

// Configuration ---------------------------------------------------------

typedef struct mnm_config mnm_config;

MNM_API mnm_status mnm_config_default(mnm_config** out);
MNM_API mnm_status mnm_config_parse(const char* text, mnm_config** out);
MNM_API mnm_status mnm_config_load(const char* path, mnm_config** out);
// *out is released with mnm_string_free.
MNM_API mnm_status mnm_config_serialize(const mnm_config* config, char** out);
// variant: "mnm-mol", "mol-l" or "mol-sn".
MNM_API mnm_status mnm_config_set_variant(mnm_config* config, const char* variant);
MNM_API void mnm_config_free(mnm_config* config);

// Datasets --------------------------------------------------------------

typedef struct mnm_dataset_spec {
  size_t height;
  size_t width;
  size_t coils;
  double accel;
  size_t count;
  double sigma;
  uint64_t seed;
  int mask_1d;  // nonzero: Cartesian line mask; zero: 2D variable density
} mnm_dataset_spec;

MNM_API void mnm_dataset_spec_default(mnm_dataset_spec* spec);
MNM_API mnm_status mnm_gen_data(const mnm_dataset_spec* spec, const char* out_dir);

typedef struct mnm_dataset mnm_dataset;

MNM_API mnm_status mnm_dataset_read(const char* dir, mnm_dataset** out);
MNM_API size_t mnm_dataset_size(const mnm_dataset* dataset);
// Copies the ground-truth image of sample `index` into `out` (2*H*W values).
MNM_API mnm_status mnm_dataset_image(const mnm_dataset* dataset, size_t index, double* out, size_t out_len);
MNM_API void mnm_dataset_free(mnm_dataset* dataset);

// Models ----------------------------------------------------------------

typedef struct mnm_model mnm_model;

MNM_API mnm_status mnm_model_load(const char* path, mnm_model** out);
MNM_API mnm_status mnm_model_save(const mnm_model* model, const char* path);
// Any output pointer may be NULL. *variant points to static storage.
MNM_API mnm_status mnm_model_info(const mnm_model* model, const char** variant, double* m, double* delta,
                                  double* lambda);
// Reconstructs sample `index` from its SENSE start into `out` (2*H*W values).
MNM_API mnm_status mnm_model_reconstruct(const mnm_model* model, const mnm_dataset* dataset, size_t index,
                                         double* out, size_t out_len);
MNM_API void mnm_model_free(mnm_model* model);

// Arrays and metrics ----------------------------------------------------

MNM_API mnm_status mnm_array_write(const char* path, const double* data, const uint32_t* dims, size_t ndim);
// *data and *dims are released with mnm_buffer_free.
MNM_API mnm_status mnm_array_read(const char* path, double** data, size_t* count, uint32_t** dims, size_t* ndim);
MNM_API mnm_status mnm_psnr(const double* x, const double* ref, size_t height, size_t width, double* out);
MNM_API mnm_status mnm_ssim(const double* x, const double* ref, size_t height, size_t width, double* out);

// Commands --------------------------------------------------------------

// Trains on `data_dir` and writes checkpoint.json and history.csv into
// `out_dir`. Returns MNM_ERR_FAILED if training aborted.
MNM_API mnm_status mnm_train(const mnm_config* config, const char* data_dir, const char* out_dir, mnm_log_fn log,
                             void* user);
// Writes reconstructions, PNG images and metrics.csv into `out_dir`.
// mean_psnr may be NULL.
MNM_API mnm_status mnm_reconstruct(const char* ckpt, const char* data_dir, const char* out_dir, mnm_log_fn log,
                                   void* user, double* mean_psnr);
// mode: "adversarial" or "gaussian". Writes reports.csv and curve.csv.
MNM_API mnm_status mnm_eval_robust(const char* ckpt, const char* data_dir, const char* mode, const double* eps,
                                   size_t n_eps, const mnm_config* config, const char* out_dir, mnm_log_fn log,
                                   void* user);
// Runs the property suites; *all_passed is 1 iff every suite passed.
MNM_API mnm_status mnm_verify_lemmas(const mnm_config* config, mnm_log_fn log, void* user, int* all_passed);
// Writes ratios.csv and histogram.csv into `out_dir`.
MNM_API mnm_status mnm_choose_delta(const char* data_dir, double mu, const char* out_dir, double* delta);

#ifdef __cplusplus
}
#endif

#endif  // MNMMOL_H
