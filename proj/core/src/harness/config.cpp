// Copyright 2026 The stackkd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stackkd/harness/config.hpp"

#include "stackkd/nn/optim.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace stackkd {

namespace fs = std::filesystem;

void OptimConfig::validate() const {
  if (name != "adam" && name != "sgd") throw Error("unknown optimizer: " + name);
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("learning rate must be > 0");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (clip_norm < 0.0) throw Error("clip_norm must be >= 0");
}

void to_json(nlohmann::ordered_json& j, const OptimConfig& c) {
  j = {{"name", c.name},         {"lr", c.lr},
       {"batch_size", c.batch_size}, {"epochs", c.epochs},
       {"momentum", c.momentum}, {"weight_decay", c.weight_decay},
       {"clip_norm", c.clip_norm}};
}

void from_json(const nlohmann::ordered_json& j, OptimConfig& c) {
  c.name = j.value("name", c.name);
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.momentum = j.value("momentum", c.momentum);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
}

std::unique_ptr<nn::Optimizer> make_optimizer(const OptimConfig& c, std::vector<nn::Var> params) {
  c.validate();
  if (c.name == "sgd") return std::make_unique<nn::SgdMomentum>(std::move(params), c.lr, c.momentum, c.weight_decay);
  return std::make_unique<nn::Adam>(std::move(params), c.lr);
}

void RunConfig::validate() const {
  distill.validate();
  teacher.validate();
  render.validate();
  teacher_optim.validate();
  student_optim.validate();
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw Error("val_fraction must be in [0, 1)");
}

RunConfig default_run_config() { return RunConfig{}; }

namespace {

nlohmann::ordered_json render_to_json(const RenderSpec& r) {
  const auto& a = r.augmentation;
  return {{"renderer", r.renderer},
          {"per_class_count", r.per_class_count},
          {"seed", r.seed},
          {"resolution", r.resolution},
          {"augmentation",
           {{"rotation_deg", a.rotation_deg},
            {"scale_min", a.scale_min},
            {"scale_max", a.scale_max},
            {"translate_px", a.translate_px},
            {"noise", a.noise}}}};
}

void render_from_json(const nlohmann::ordered_json& j, RenderSpec& r) {
  r.renderer = j.value("renderer", r.renderer);
  r.per_class_count = j.value("per_class_count", r.per_class_count);
  r.seed = j.value("seed", r.seed);
  r.resolution = j.value("resolution", r.resolution);
  if (j.contains("augmentation")) {
    const auto& a = j.at("augmentation");
    auto& o = r.augmentation;
    o.rotation_deg = a.value("rotation_deg", o.rotation_deg);
    o.scale_min = a.value("scale_min", o.scale_min);
    o.scale_max = a.value("scale_max", o.scale_max);
    o.translate_px = a.value("translate_px", o.translate_px);
    o.noise = a.value("noise", o.noise);
  }
}

std::string path_string(const fs::path& p) { return p.generic_string(); }

}  // namespace

nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["data"] = {{"train_manifest", path_string(c.train_manifest)},
               {"test_manifest", path_string(c.test_manifest)},
               {"teacher_data", path_string(c.teacher_data)},
               {"val_fraction", c.val_fraction}};
  j["output_dir"] = path_string(c.output_dir);
  j["teacher_checkpoint"] = path_string(c.teacher_checkpoint);
  j["conventional_teacher"] = path_string(c.conventional_teacher);
  j["teacher_graphemes"] = c.teacher_graphemes;
  j["distill"] = c.distill;
  j["teacher"] = c.teacher;
  j["render"] = render_to_json(c.render);
  j["student"] = c.student;
  j["teacher_optim"] = c.teacher_optim;
  j["student_optim"] = c.student_optim;
  return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig c) {
  try {
    if (!j.is_object()) throw Error("run configuration must be a JSON object");
    c.seed = j.value("seed", c.seed);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("train_manifest")) c.train_manifest = d.at("train_manifest").get<std::string>();
      if (d.contains("test_manifest")) c.test_manifest = d.at("test_manifest").get<std::string>();
      if (d.contains("teacher_data")) c.teacher_data = d.at("teacher_data").get<std::string>();
      c.val_fraction = d.value("val_fraction", c.val_fraction);
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("teacher_checkpoint")) c.teacher_checkpoint = j.at("teacher_checkpoint").get<std::string>();
    if (j.contains("conventional_teacher")) c.conventional_teacher = j.at("conventional_teacher").get<std::string>();
    if (j.contains("teacher_graphemes")) c.teacher_graphemes = j.at("teacher_graphemes").get<std::vector<std::string>>();
    if (j.contains("distill")) from_json(j.at("distill"), c.distill);
    if (j.contains("teacher")) from_json(j.at("teacher"), c.teacher);
    if (j.contains("render")) render_from_json(j.at("render"), c.render);
    if (j.contains("student")) from_json(j.at("student"), c.student);
    if (j.contains("teacher_optim")) from_json(j.at("teacher_optim"), c.teacher_optim);
    if (j.contains("student_optim")) from_json(j.at("student_optim"), c.student_optim);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid run configuration: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

fs::path resolve_output_path(const fs::path& p) {
  if (p.is_absolute()) return p;
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root) return fs::path(root) / p;
  return p;
}

}  // namespace stackkd
