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

// Run configuration: a nested JSON document; fields left out keep defaults.

#pragma once

#include "stackkd/distill.hpp"
#include "stackkd/models.hpp"
#include "stackkd/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace stackkd {

namespace nn {
class Optimizer;
}

struct OptimConfig {
  std::string name = "adam";  // "adam" or "sgd"
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 20;
  double momentum = 0.9;      // sgd only
  double weight_decay = 0.0;  // sgd only
  double clip_norm = 0.0;     // 0 disables clipping

  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const OptimConfig& c);
void from_json(const nlohmann::ordered_json& j, OptimConfig& c);

std::unique_ptr<nn::Optimizer> make_optimizer(const OptimConfig& c, std::vector<nn::Var> params);

struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;
  std::filesystem::path output_dir = "out";
  std::filesystem::path teacher_checkpoint;       // glyph teacher for lila / super
  std::filesystem::path conventional_teacher;     // sequence teacher for conventional
  std::filesystem::path teacher_data;             // glyph dataset directory; generated when empty
  std::vector<std::string> teacher_graphemes;     // teacher classes; training graphemes when empty
  double val_fraction = 0.1;

  DistillConfig distill;
  TeacherConfig teacher;
  RenderSpec render;
  StudentConfig student;
  OptimConfig teacher_optim{"sgd", 0.01, 32, 10};
  OptimConfig student_optim{"adam", 1e-3, 32, 20};

  void validate() const;
};

RunConfig default_run_config();
nlohmann::ordered_json run_config_to_json(const RunConfig& c);
// Overlays the keys present in `j` onto `base`.
RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base = default_run_config());
RunConfig load_run_config(const std::filesystem::path& path);

// Name of the environment variable that relocates relative output paths.
inline constexpr const char* kOutputRootEnv = "STACKKD_OUTPUT_ROOT";
std::filesystem::path resolve_output_path(const std::filesystem::path& p);

}  // namespace stackkd
