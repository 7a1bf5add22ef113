// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/dataset.hpp"

#include <cstdio>
#include <json.hpp>

#include "error.hpp"
#include "io/array_io.hpp"

namespace mnm::io {
namespace {

using json = nlohmann::json;
constexpr const char* kFormat = "mnmmol-dataset";
constexpr int kVersion = 1;

std::string sample_file(std::size_t k, const char* what) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "sample_%04zu_%s.mnm", k, what);
  return buf;
}

json read_manifest_json(const std::filesystem::path& dir) {
  try {
    json j = json::parse(read_file(dir / "manifest.json"));
    if (j.at("format").get<std::string>() != kFormat) {
      throw FormatError(FormatErrorKind::bad_magic, "manifest: not a dataset manifest");
    }
    if (j.at("version").get<int>() != kVersion) throw FormatError(FormatErrorKind::malformed, "manifest: version");
    return j;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::malformed, (dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace

const char* mask_kind_name(mri::MaskKind k) { return k == mri::MaskKind::one_d ? "1d" : "2d"; }

mri::MaskKind parse_mask_kind(const std::string& s) {
  if (s == "1d") return mri::MaskKind::one_d;
  if (s == "2d") return mri::MaskKind::two_d;
  throw InvalidArgument("unknown mask kind '" + s + "' (expected 1d or 2d)");
}

std::vector<train::TrainSample> generate_dataset(const DatasetSpec& spec) {
  if (spec.count == 0) throw InvalidArgument("generate_dataset: count must be >= 1");
  std::vector<train::TrainSample> out;
  out.reserve(spec.count);
  for (std::size_t k = 0; k < spec.count; ++k) {
    const std::uint64_t base = 4 * static_cast<std::uint64_t>(k);
    Tensor x = mri::generate_phantom(spec.height, spec.width, mri::derive_seed(spec.seed, base));
    Tensor maps = mri::generate_coil_maps(spec.coils, spec.height, spec.width, mri::derive_seed(spec.seed, base + 1));
    Tensor mask = mri::generate_vd_mask(spec.height, spec.width, spec.accel, mri::derive_seed(spec.seed, base + 2),
                                        spec.mask);
    mri::MeasurementModel mm(std::move(mask), std::move(maps), spec.sigma);
    mri::KSpaceData b = mri::add_noise(mri::apply_A(x, mm), mm, spec.sigma, mri::derive_seed(spec.seed, base + 3));
    out.push_back(train::TrainSample{std::move(x), std::move(b), std::move(mm)});
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   const std::vector<train::TrainSample>& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  json samples = json::array();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const train::TrainSample& s = data[k];
    const json entry = {{"image", sample_file(k, "image")},
                        {"maps", sample_file(k, "maps")},
                        {"mask", sample_file(k, "mask")},
                        {"kspace", sample_file(k, "kspace")}};
    write_array(dir / entry["image"].get<std::string>(), s.x_ref);
    write_array(dir / entry["maps"].get<std::string>(), s.mm.coil_maps());
    write_array(dir / entry["mask"].get<std::string>(), s.mm.mask());
    write_array(dir / entry["kspace"].get<std::string>(), s.b.samples);
    samples.push_back(entry);
  }
  const json manifest = {{"format", kFormat},
                         {"version", kVersion},
                         {"height", spec.height},
                         {"width", spec.width},
                         {"coils", spec.coils},
                         {"accel", spec.accel},
                         {"count", data.size()},
                         {"sigma", spec.sigma},
                         {"seed", spec.seed},
                         {"mask", mask_kind_name(spec.mask)},
                         {"samples", samples}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

DatasetSpec read_manifest(const std::filesystem::path& dir) {
  const json j = read_manifest_json(dir);
  try {
    DatasetSpec spec;
    spec.height = j.at("height").get<std::size_t>();
    spec.width = j.at("width").get<std::size_t>();
    spec.coils = j.at("coils").get<std::size_t>();
    spec.accel = j.at("accel").get<double>();
    spec.count = j.at("count").get<std::size_t>();
    spec.sigma = j.at("sigma").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.mask = parse_mask_kind(j.at("mask").get<std::string>());
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::malformed, (dir / "manifest.json").string() + ": " + e.what());
  }
}

std::vector<train::TrainSample> read_dataset(const std::filesystem::path& dir) {
  const DatasetSpec spec = read_manifest(dir);
  const json j = read_manifest_json(dir);
  const json& samples = j.at("samples");
  if (!samples.is_array() || samples.size() != spec.count) {
    throw FormatError(FormatErrorKind::malformed, "manifest: sample list does not match count");
  }
  std::vector<train::TrainSample> out;
  for (const json& e : samples) {
    try {
      Tensor x = read_array(dir / e.at("image").get<std::string>());
      Tensor maps = read_array(dir / e.at("maps").get<std::string>());
      Tensor mask = read_array(dir / e.at("mask").get<std::string>());
      Tensor kspace = read_array(dir / e.at("kspace").get<std::string>());
      mri::MeasurementModel mm(std::move(mask), std::move(maps), spec.sigma);
      if (x.shape() != mm.image_shape() || kspace.shape() != mm.kspace_shape()) {
        throw FormatError(FormatErrorKind::malformed, "dataset: array shapes do not match");
      }
      const mri::KSpaceData b = mri::bind_kspace(kspace, mm);
      if (!(b.samples == kspace)) {
        throw FormatError(FormatErrorKind::malformed, "dataset: k-space has samples outside the mask");
      }
      out.push_back(train::TrainSample{std::move(x), b, std::move(mm)});
    } catch (const json::exception& ex) {
      throw FormatError(FormatErrorKind::malformed, std::string("manifest: ") + ex.what());
    } catch (const InvalidArgument& ex) {
      throw FormatError(FormatErrorKind::malformed, std::string("dataset: ") + ex.what());
    } catch (const ShapeError& ex) {
      throw FormatError(FormatErrorKind::malformed, std::string("dataset: ") + ex.what());
    }
  }
  return out;
}

}  // namespace mnm::io
