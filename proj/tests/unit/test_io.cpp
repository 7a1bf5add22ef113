// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <png.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "error.hpp"
#include "io/array_io.hpp"
#include "io/checkpoint.hpp"
#include "io/config.hpp"
#include "io/dataset.hpp"
#include "io/png.hpp"
#include "support.hpp"

using namespace mnm;
using mnm::test::random_tensor;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / (std::string("mnm_test_io_") + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FormatErrorKind decode_error(const std::string& bytes) {
  try {
    io::decode_array(bytes);
  } catch (const FormatError& e) {
    return e.detail();
  }
  FAIL("decode succeeded");
  return FormatErrorKind::malformed;
}

}  // namespace

TEST_CASE("array container round-trips bit-exactly") {
  Tensor t = random_tensor({3, 4, 5}, 1);
  t[0] = -0.0;
  t[1] = std::numeric_limits<double>::denorm_min();
  t[2] = std::numeric_limits<double>::max();
  const std::string bytes = io::encode_array(t);
  CHECK(bytes.size() == 4 + 1 + 1 + 3 * 4 + 8 * 60);
  CHECK(bytes.substr(0, 4) == "MNM1");
  const Tensor u = io::decode_array(bytes);
  REQUIRE(u.shape() == t.shape());
  CHECK(std::memcmp(u.data(), t.data(), 8 * t.size()) == 0);
  CHECK(std::signbit(u[0]));

  const fs::path dir = scratch_dir("array");
  io::write_array(dir / "a.mnm", t);
  CHECK(io::read_file(dir / "a.mnm") == bytes);
  CHECK(io::read_array(dir / "a.mnm") == t);

  const Tensor scalar = Tensor::scalar(2.5);
  CHECK(io::decode_array(io::encode_array(scalar)) == scalar);
}

TEST_CASE("array container rejects corrupt input with distinct kinds") {
  const std::string good = io::encode_array(random_tensor({2, 3}, 2));
  std::string bad_magic = good;
  bad_magic[3] = '2';
  CHECK(decode_error(bad_magic) == FormatErrorKind::bad_magic);
  CHECK(decode_error("MN") == FormatErrorKind::truncated);
  CHECK(decode_error(good.substr(0, 8)) == FormatErrorKind::truncated);
  CHECK(decode_error(good.substr(0, good.size() - 1)) == FormatErrorKind::truncated);
  std::string dtype = good;
  dtype[4] = 7;
  CHECK(decode_error(dtype) == FormatErrorKind::unknown_dtype);
  CHECK(decode_error(good + "x") == FormatErrorKind::malformed);
  CHECK_THROWS_AS(io::read_array("/nonexistent/dir/a.mnm"), IoError);
}

TEST_CASE("config defaults, strictness and idempotence") {
  const io::ExperimentConfig d = io::parse_config("{}");
  CHECK(d.train.beta == 1.0);
  CHECK(d.train.pga_steps == 15);
  CHECK(d.robust.adversarial.steps == 20);

  const io::ExperimentConfig c = io::parse_config(R"({"train": {"beta": 2.5, "variant": "mol-l", "seed": 9},
      "network": {"channels": [2, 8, 2], "form": "residual"}, "verify": {"lemma_configs": 25}})");
  CHECK(c.train.beta == 2.5);
  CHECK(c.train.variant == train::Variant::mol_l);
  CHECK(c.train.seed == 9);
  CHECK(c.train.network.channels == std::vector<std::size_t>{2, 8, 2});
  CHECK(c.verify.lemma_configs == 25);

  const std::string s = io::serialize_config(c);
  CHECK(io::serialize_config(io::parse_config(s)) == s);

  CHECK_THROWS_AS(io::parse_config(R"({"trian": {}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"train": {"betta": 1}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"train": {"epochs": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"train": {"seed": -1}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"train": {"variant": "modl"}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"train": {"m": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(R"({"network": {"channels": [3, 2]}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_config("{"), ConfigError);
  CHECK_THROWS_AS(io::parse_config("[]"), ConfigError);
}

TEST_CASE("checkpoint round-trip reproduces the model") {
  train::TrainConfig cfg;
  cfg.variant = train::Variant::mol_l;
  cfg.network.channels = {2, 5, 2};
  train::TrainedModel m = train::initial_model(cfg, 16, 16);
  m.delta = 0.123456789012345678;
  m.deq.lambda = 9.87654321;
  const train::TrainedModel r = io::decode_checkpoint(io::encode_checkpoint(m));
  CHECK(r.variant == m.variant);
  CHECK(r.delta == m.delta);
  CHECK(r.m == m.m);
  CHECK(r.deq.lambda == m.deq.lambda);
  CHECK(r.deq.solver == m.deq.solver);
  CHECK(r.deq.cfg.max_iter == m.deq.cfg.max_iter);
  CHECK(std::get<ops::ScoreNetwork>(r.deq.score).theta() == std::get<ops::ScoreNetwork>(m.deq.score).theta());
  CHECK(std::get<ops::ScoreNetwork>(r.deq.score).form() == ops::ScoreForm::residual);

  CHECK_THROWS_AS(io::decode_checkpoint("{}"), FormatError);
  CHECK_THROWS_AS(io::decode_checkpoint("not json"), FormatError);
  CHECK_THROWS_AS(io::decode_checkpoint(R"({"format": "other", "version": 1})"), FormatError);
}

TEST_CASE("dataset write/read round-trip and byte-identical regeneration") {
  io::DatasetSpec spec;
  spec.height = spec.width = 16;
  spec.count = 3;
  spec.seed = 5;
  const auto data = io::generate_dataset(spec);
  const fs::path a = scratch_dir("data_a"), b = scratch_dir("data_b");
  io::write_dataset(a, spec, data);
  io::write_dataset(b, spec, io::generate_dataset(spec));
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(io::read_file(entry.path()) == io::read_file(b / entry.path().filename()));
  }
  const io::DatasetSpec back = io::read_manifest(a);
  CHECK(back.count == 3);
  CHECK(back.seed == 5);
  const auto loaded = io::read_dataset(a);
  REQUIRE(loaded.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(loaded[k].x_ref == data[k].x_ref);
    CHECK(loaded[k].b.samples == data[k].b.samples);
    CHECK(loaded[k].mm.mask() == data[k].mm.mask());
    CHECK(loaded[k].mm.coil_maps() == data[k].mm.coil_maps());
  }

  // a sample outside the mask is rejected
  Tensor ks = data[0].b.samples;
  std::size_t off = 0;
  while (data[0].mm.mask()[off] != 0.0) ++off;
  ks[off] = 1.0;
  io::write_array(a / "sample_0000_kspace.mnm", ks);
  CHECK_THROWS_AS(io::read_dataset(a), FormatError);
  CHECK_THROWS_AS(io::read_dataset(scratch_dir("empty")), IoError);
}

TEST_CASE("png output decodes to the clipped input") {
  Tensor g({3, 4});
  for (std::size_t i = 0; i < 12; ++i) g[i] = static_cast<double>(i) / 11.0;
  g[0] = -1.0;
  g[11] = 2.0;
  const fs::path dir = scratch_dir("png");
  io::write_png(dir / "g.png", g);
  io::write_png(dir / "h.png", g);
  CHECK(io::read_file(dir / "g.png") == io::read_file(dir / "h.png"));

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_file(&image, (dir / "g.png").c_str()));
  image.format = PNG_FORMAT_GRAY;
  REQUIRE(image.width == 4);
  REQUIRE(image.height == 3);
  std::vector<unsigned char> px(12);
  REQUIRE(png_image_finish_read(&image, nullptr, px.data(), 0, nullptr));
  CHECK(px[0] == 0);
  CHECK(px[11] == 255);
  CHECK(px[5] == static_cast<unsigned char>(std::lround(255.0 * 5.0 / 11.0)));

  const Tensor img = random_tensor({2, 4, 4}, 3);
  const Tensor disp = io::display_magnitude(img);
  double mx = 0.0;
  for (double v : disp.values()) mx = std::max(mx, v);
  CHECK(mx == doctest::Approx(1.0));
  CHECK_THROWS_AS(io::write_png(dir / "bad.png", img), ShapeError);
}
