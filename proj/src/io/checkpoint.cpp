// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/checkpoint.hpp"

#include <json.hpp>
#include <variant>

#include "error.hpp"
#include "io/array_io.hpp"

namespace mnm::io {
namespace {

using json = nlohmann::json;
constexpr const char* kFormat = "mnmmol-checkpoint";
constexpr int kVersion = 1;

json tensor_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", t.values()}}; }

Tensor json_tensor(const json& j) {
  Shape shape = j.at("shape").get<Shape>();
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (shape_numel(shape) != data.size()) throw FormatError(FormatErrorKind::malformed, "checkpoint: tensor size");
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::string encode_checkpoint(const train::TrainedModel& model) {
  const auto* net = std::get_if<ops::ScoreNetwork>(&model.deq.score);
  if (!net) throw InvalidArgument("checkpoint: only network scores can be saved");
  const SolverConfig& s = model.deq.cfg;
  json layers = json::array();
  for (const ops::ConvLayer& l : net->layers()) layers.push_back({{"weight", tensor_json(l.weight)}, {"bias", tensor_json(l.bias)}});
  const json j = {
      {"format", kFormat},
      {"version", kVersion},
      {"variant", train::variant_name(model.variant)},
      {"m", model.m},
      {"delta", model.delta},
      {"lambda", model.deq.lambda},
      {"solver",
       {{"gamma", s.gamma},
        {"lambda", s.lambda},
        {"alpha", s.alpha},
        {"tol", s.tol},
        {"max_iter", s.max_iter},
        {"backward_tol", s.backward_tol},
        {"backward_max_iter", s.backward_max_iter},
        {"inner_tol", s.inner_tol},
        {"inner_max_iter", s.inner_max_iter},
        {"m_assumed", s.m_assumed}}},
      {"network", {{"form", net->form() == ops::ScoreForm::direct ? "direct" : "residual"}, {"layers", layers}}}};
  return j.dump(1) + "\n";
}

train::TrainedModel decode_checkpoint(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) {
      throw FormatError(FormatErrorKind::bad_magic, "checkpoint: not a model checkpoint");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw FormatError(FormatErrorKind::malformed, "checkpoint: unsupported version");
    }
    train::TrainedModel model;
    model.variant = train::parse_variant(j.at("variant").get<std::string>());
    model.m = j.at("m").get<double>();
    model.delta = j.at("delta").get<double>();
    model.deq.solver = train::solver_for(model.variant);
    model.deq.lambda = j.at("lambda").get<double>();
    const json& s = j.at("solver");
    SolverConfig& c = model.deq.cfg;
    c.gamma = s.at("gamma").get<double>();
    c.lambda = s.at("lambda").get<double>();
    c.alpha = s.at("alpha").get<double>();
    c.tol = s.at("tol").get<double>();
    c.max_iter = s.at("max_iter").get<int>();
    c.backward_tol = s.at("backward_tol").get<double>();
    c.backward_max_iter = s.at("backward_max_iter").get<int>();
    c.inner_tol = s.at("inner_tol").get<double>();
    c.inner_max_iter = s.at("inner_max_iter").get<int>();
    c.m_assumed = s.at("m_assumed").get<double>();
    c.validate();
    const json& n = j.at("network");
    const std::string form = n.at("form").get<std::string>();
    if (form != "direct" && form != "residual") throw FormatError(FormatErrorKind::malformed, "checkpoint: form");
    std::vector<ops::ConvLayer> layers;
    for (const json& l : n.at("layers")) layers.push_back({json_tensor(l.at("weight")), json_tensor(l.at("bias"))});
    model.deq.score = ops::ScoreNetwork(std::move(layers), form == "direct" ? ops::ScoreForm::direct
                                                                            : ops::ScoreForm::residual);
    return model;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::malformed, std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatErrorKind::malformed, std::string("checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(FormatErrorKind::malformed, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const train::TrainedModel& model) {
  write_file(path, encode_checkpoint(model));
}

train::TrainedModel load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace mnm::io
