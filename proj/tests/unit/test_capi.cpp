// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mnmmol.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / (std::string("mnm_test_capi_") + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

mnm_dataset_spec small_spec(std::uint64_t seed) {
  mnm_dataset_spec s;
  mnm_dataset_spec_default(&s);
  s.height = s.width = 16;
  s.count = 2;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("status strings and last error") {
  CHECK(std::string(mnm_status_string(MNM_OK)) == "ok");
  CHECK(std::string(mnm_status_string(MNM_ERR_FORMAT)) == "format error");
  CHECK(std::string(mnm_version()).size() > 0);
  mnm_config* c = nullptr;
  CHECK(mnm_config_parse(R"({"train": {"nope": 1}})", &c) == MNM_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(mnm_last_error()).find("train.nope") != std::string::npos);
  REQUIRE(mnm_config_default(&c) == MNM_OK);
  CHECK(std::string(mnm_last_error()).empty());
  CHECK(mnm_config_set_variant(c, "modl") == MNM_ERR_INVALID_ARGUMENT);
  CHECK(mnm_config_set_variant(c, "mol-sn") == MNM_OK);
  char* text = nullptr;
  REQUIRE(mnm_config_serialize(c, &text) == MNM_OK);
  CHECK(std::string(text).find("mol-sn") != std::string::npos);
  mnm_config* back = nullptr;
  REQUIRE(mnm_config_parse(text, &back) == MNM_OK);
  char* again = nullptr;
  REQUIRE(mnm_config_serialize(back, &again) == MNM_OK);
  CHECK(std::string(text) == std::string(again));
  mnm_string_free(text);
  mnm_string_free(again);
  mnm_config_free(back);
  mnm_config_free(c);
  CHECK(mnm_config_default(nullptr) == MNM_ERR_INVALID_ARGUMENT);
  CHECK(mnm_config_load("/nonexistent/config.json", &c) == MNM_ERR_IO);
}

TEST_CASE("array write/read round-trip and error codes") {
  const fs::path dir = scratch("array");
  const std::vector<double> data{1.5, -0.0, 3.25, 1e-300, -7.0, 2.0};
  const uint32_t dims[] = {2, 3};
  REQUIRE(mnm_array_write((dir / "a.mnm").c_str(), data.data(), dims, 2) == MNM_OK);
  double* out = nullptr;
  uint32_t* out_dims = nullptr;
  size_t count = 0, ndim = 0;
  REQUIRE(mnm_array_read((dir / "a.mnm").c_str(), &out, &count, &out_dims, &ndim) == MNM_OK);
  CHECK(count == 6);
  CHECK(ndim == 2);
  CHECK(out_dims[0] == 2);
  CHECK(out_dims[1] == 3);
  CHECK(std::memcmp(out, data.data(), sizeof(double) * 6) == 0);
  mnm_buffer_free(out);
  mnm_buffer_free(out_dims);

  std::ofstream((dir / "bad.mnm").c_str()) << "NOPE";
  CHECK(mnm_array_read((dir / "bad.mnm").c_str(), &out, &count, &out_dims, &ndim) == MNM_ERR_FORMAT);
  CHECK(mnm_array_read((dir / "missing.mnm").c_str(), &out, &count, &out_dims, &ndim) == MNM_ERR_IO);
}

TEST_CASE("psnr through the C interface") {
  std::vector<double> ref(2 * 8 * 8, 0.0), x;
  for (std::size_t i = 0; i < 64; ++i) ref[i] = static_cast<double>(i % 5) / 4.0;
  x = ref;
  double p = 0.0;
  REQUIRE(mnm_psnr(x.data(), ref.data(), 8, 8, &p) == MNM_OK);
  CHECK(std::isinf(p));
  // max |ref| = 1, magnitude error 0.1 everywhere -> mse 0.01 -> 20 dB
  for (std::size_t i = 0; i < 64; ++i) x[i] = ref[i] + 0.1;
  REQUIRE(mnm_psnr(x.data(), ref.data(), 8, 8, &p) == MNM_OK);
  CHECK(p == doctest::Approx(20.0).epsilon(1e-12));
  double s = 0.0;
  REQUIRE(mnm_ssim(ref.data(), ref.data(), 8, 8, &s) == MNM_OK);
  CHECK(s == doctest::Approx(1.0));
  std::vector<double> zero(128, 0.0);
  CHECK(mnm_psnr(x.data(), zero.data(), 8, 8, &p) == MNM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("datasets, training, models and commands") {
  const fs::path dir = scratch("pipeline");
  const mnm_dataset_spec spec = small_spec(3);
  REQUIRE(mnm_gen_data(&spec, (dir / "data").c_str()) == MNM_OK);
  mnm_dataset* ds = nullptr;
  REQUIRE(mnm_dataset_read((dir / "data").c_str(), &ds) == MNM_OK);
  CHECK(mnm_dataset_size(ds) == 2);
  std::vector<double> img(2 * 16 * 16);
  CHECK(mnm_dataset_image(ds, 0, img.data(), img.size()) == MNM_OK);
  CHECK(mnm_dataset_image(ds, 0, img.data(), 10) == MNM_ERR_SHAPE);
  CHECK(mnm_dataset_image(ds, 5, img.data(), img.size()) == MNM_ERR_INVALID_ARGUMENT);

  mnm_config* cfg = nullptr;
  REQUIRE(mnm_config_parse(R"({"train": {"epochs": 1}, "network": {"channels": [2, 4, 2]}})", &cfg) == MNM_OK);
  std::vector<std::string> lines;
  const mnm_log_fn collect = [](const char* line, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(line);
  };
  REQUIRE(mnm_train(cfg, (dir / "data").c_str(), (dir / "train").c_str(), collect, &lines) == MNM_OK);
  CHECK(!lines.empty());
  CHECK(fs::exists(dir / "train" / "history.csv"));

  mnm_model* model = nullptr;
  REQUIRE(mnm_model_load((dir / "train" / "checkpoint.json").c_str(), &model) == MNM_OK);
  const char* variant = nullptr;
  double m = 0.0, delta = 0.0, lambda = 0.0;
  REQUIRE(mnm_model_info(model, &variant, &m, &delta, &lambda) == MNM_OK);
  CHECK(std::string(variant) == "mnm-mol");
  CHECK(m == 0.1);
  CHECK(delta > 0.0);
  CHECK(lambda > 0.0);
  std::vector<double> recon(img.size());
  REQUIRE(mnm_model_reconstruct(model, ds, 1, recon.data(), recon.size()) == MNM_OK);
  REQUIRE(mnm_dataset_image(ds, 1, img.data(), img.size()) == MNM_OK);
  double p = 0.0;
  REQUIRE(mnm_psnr(recon.data(), img.data(), 16, 16, &p) == MNM_OK);
  CHECK(p > 10.0);
  REQUIRE(mnm_model_save(model, (dir / "copy.json").c_str()) == MNM_OK);

  double mean_psnr = 0.0;
  REQUIRE(mnm_reconstruct((dir / "copy.json").c_str(), (dir / "data").c_str(), (dir / "recon").c_str(), nullptr,
                          nullptr, &mean_psnr) == MNM_OK);
  CHECK(mean_psnr > 10.0);
  const double eps[] = {0.02, 0.05};
  CHECK(mnm_eval_robust((dir / "copy.json").c_str(), (dir / "data").c_str(), "gaussian", eps, 2, cfg,
                        (dir / "robust").c_str(), nullptr, nullptr) == MNM_OK);
  CHECK(fs::exists(dir / "robust" / "curve.csv"));
  CHECK(mnm_eval_robust((dir / "copy.json").c_str(), (dir / "data").c_str(), "sideways", eps, 2, cfg,
                        (dir / "robust").c_str(), nullptr, nullptr) == MNM_ERR_INVALID_ARGUMENT);
  const double decreasing[] = {0.05, 0.02};
  CHECK(mnm_eval_robust((dir / "copy.json").c_str(), (dir / "data").c_str(), "adversarial", decreasing, 2, cfg,
                        (dir / "robust").c_str(), nullptr, nullptr) == MNM_ERR_INVALID_ARGUMENT);
  double d = 0.0;
  REQUIRE(mnm_choose_delta((dir / "data").c_str(), 1e-2, (dir / "delta").c_str(), &d) == MNM_OK);
  CHECK(d == delta);

  mnm_model_free(model);
  mnm_config_free(cfg);
  mnm_dataset_free(ds);
}

TEST_CASE("aborted training reports failure") {
  const fs::path dir = scratch("abort");
  const mnm_dataset_spec spec = small_spec(4);
  REQUIRE(mnm_gen_data(&spec, (dir / "data").c_str()) == MNM_OK);
  mnm_config* cfg = nullptr;
  REQUIRE(mnm_config_parse(R"({"train": {"epochs": 1}, "solver": {"max_iter": 2}})", &cfg) == MNM_OK);
  CHECK(mnm_train(cfg, (dir / "data").c_str(), (dir / "train").c_str(), nullptr, nullptr) == MNM_ERR_FAILED);
  CHECK(std::string(mnm_last_error()).find("aborted") != std::string::npos);
  CHECK(fs::exists(dir / "train" / "history.csv"));
  CHECK(!fs::exists(dir / "train" / "checkpoint.json"));
  mnm_config_free(cfg);
}
