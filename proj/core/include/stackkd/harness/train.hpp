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

// Training loops for the glyph teacher and the sequence student, and
// checkpoint evaluation.

#pragma once

#include "stackkd/distill.hpp"
#include "stackkd/harness/config.hpp"
#include "stackkd/harness/dataset.hpp"
#include "stackkd/metrics.hpp"
#include "stackkd/models.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace stackkd {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;  // teacher: held-out accuracy %, student: validation WRR
};

nlohmann::ordered_json epochs_to_json(const std::vector<EpochLog>& epochs);

// Teacher classes: cfg.teacher_graphemes if set, else the graphemes of the
// training manifest (in inventory order).
GraphemeInventory teacher_inventory_for(const RunConfig& cfg);
// Reads cfg.teacher_data when set, else renders cfg.render over `inv`.
std::vector<GlyphSample> teacher_glyphs_for(const RunConfig& cfg, const GraphemeInventory& inv);

struct TeacherTrainResult {
  std::filesystem::path checkpoint;
  GraphemeInventory inventory;
  std::vector<EpochLog> epochs;
  double heldout_accuracy = 0.0;
};

TeacherTrainResult train_teacher(const RunConfig& cfg, std::ostream* log = nullptr);
TeacherTrainResult train_teacher_on(const RunConfig& cfg, const GraphemeInventory& inv,
                                    const std::vector<GlyphSample>& data,
                                    const std::filesystem::path& checkpoint, std::ostream* log = nullptr);

// Records of the training manifest that take part in training: tagged
// train/val, or untagged.
std::vector<std::size_t> training_indices(const WordDatasetManifest& m);

struct StudentTrainResult {
  std::filesystem::path checkpoint;
  GraphemeInventory inventory;
  std::size_t num_train = 0;
  std::size_t num_val = 0;
  std::size_t num_skipped = 0;  // labels the output sequence cannot emit
  std::vector<EpochLog> epochs;
  std::vector<double> batch_losses;
  std::size_t teacher_calls = 0;
  std::size_t teacher_fallbacks = 0;
};

// Writes student.ckpt, partition.json and train_log.json to cfg.output_dir.
StudentTrainResult train_student(const RunConfig& cfg, KdMode mode, std::ostream* log = nullptr);

struct EvalOutcome {
  EvalReport report;
  std::uint64_t seed = 0;                    // training seed of the checkpoint
  std::uint64_t unknown_occurrences = 0;     // label graphemes outside the student inventory
  std::vector<std::string> unknown_graphemes;
  std::uint64_t manifest_checksum = 0;

  nlohmann::ordered_json to_json() const;
};

// Greedy-decodes every record selected from `manifest` (records tagged
// "test" when the manifest carries split tags, else all records).
EvalOutcome evaluate_student(const LoadedStudent& student, const WordDatasetManifest& manifest);
EvalOutcome evaluate_student(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest);

std::vector<GraphemeSequence> decode_words(const LoadedStudent& student, const std::vector<GrayImage>& images,
                                           int batch_size = 32);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json_file(const std::filesystem::path& path);

}  // namespace stackkd
