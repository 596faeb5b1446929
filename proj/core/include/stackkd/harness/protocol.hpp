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

// Inter-dataset protocol: train on one corpus, test on the other, in both
// directions, across the six distillation configurations.

#pragma once

#include "stackkd/harness/config.hpp"
#include "stackkd/harness/train.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stackkd {

inline constexpr std::array<std::string_view, 6> kProtocolConfigs = {
    "No KD",
    "Conventional KD",
    "LILA-BOTI (resnet18)",
    "Super Teacher LILA-BOTI (resnet18)",
    "LILA-BOTI (conv2)",
    "Super Teacher LILA-BOTI (conv2)"};

// Directory-friendly name: no_kd, conventional, lila_resnet18, super_resnet18, ...
std::string protocol_config_slug(std::string_view name);
// Accepts a display name or a slug.
std::string_view parse_protocol_config(std::string_view s);

struct ProtocolConfig {
  RunConfig base;  // seed, distillation, student, optimizers, rendering, output_dir
  std::string name_a = "A";
  std::string name_b = "B";
  std::filesystem::path manifest_a;
  std::filesystem::path manifest_b;
  std::vector<std::string> configs;  // empty = all six
  TeacherConfig conv2_teacher{TeacherArch::conv2};
  TeacherConfig resnet_teacher{TeacherArch::resnet18};

  void validate() const;
};

// Keys: the run configuration keys plus
// "protocol": {"datasets": [{"name", "manifest"}, {"name", "manifest"}],
//              "configs": [...], "conv2_teacher": {...}, "resnet18_teacher": {...}}
ProtocolConfig protocol_config_from_json(const nlohmann::ordered_json& j);

struct ProtocolRow {
  std::string train;
  std::string test;
  std::string config;
  EvalReport report;
  std::uint64_t unknown_occurrences = 0;
};

struct ProtocolReport {
  std::uint64_t seed = 0;
  bool complete = false;
  std::string error;
  std::vector<ProtocolRow> rows;
};

// Runs every selected (direction, configuration) pair. After each row the
// table is written to <output_dir>/protocol.json; on failure the partial table
// stays on disk and the error is rethrown.
ProtocolReport run_protocol(const ProtocolConfig& cfg, std::ostream* log = nullptr);

nlohmann::ordered_json protocol_to_json(const ProtocolReport& r);
ProtocolReport protocol_from_json(const nlohmann::ordered_json& j);

// format: json, tsv or markdown.
std::string render_report(const ProtocolReport& r, std::string_view format);
void emit_report(const ProtocolReport& r, std::string_view format, const std::filesystem::path& path);

}  // namespace stackkd
