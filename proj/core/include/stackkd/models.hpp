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

// The isolated-glyph teacher classifiers and the CRNN word-level student.

#pragma once

#include "stackkd/grapheme.hpp"
#include "stackkd/image.hpp"
#include "stackkd/nn/layers.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stackkd {

enum class TeacherArch { conv2, resnet18 };

std::string to_string(TeacherArch arch);
TeacherArch parse_teacher_arch(std::string_view name);

struct TeacherConfig {
  TeacherArch arch = TeacherArch::conv2;
  int num_classes = 2;
  int input_size = 32;
  // Channel width: conv2 uses (w, 2w) filters, resnet18 uses stages
  // (w, 2w, 4w, 8w). 0 selects the architecture default (32 and 64).
  int width = 0;
  int hidden = 128;  // conv2 dense layer

  int effective_width() const;
  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const TeacherConfig& c);
void from_json(const nlohmann::ordered_json& j, TeacherConfig& c);

struct StudentConfig {
  int num_classes = 2;  // graphemes + 1; the blank is the last class
  int n_seq = 31;
  int input_height = 32;
  int input_width = 128;
  std::array<int, 5> channels{64, 128, 256, 256, 512};
  int recurrent_hidden = 256;
  bool batch_norm = true;

  int blank() const noexcept { return num_classes - 1; }
  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const StudentConfig& c);
void from_json(const nlohmann::ordered_json& j, StudentConfig& c);

// Unnormalized student scores, one row per output time step.
class LogitSequence {
 public:
  LogitSequence() = default;
  explicit LogitSequence(Matrix scores);

  const Matrix& scores() const noexcept { return scores_; }
  int n_seq() const noexcept { return static_cast<int>(scores_.rows()); }
  int num_classes() const noexcept { return static_cast<int>(scores_.cols()); }

 private:
  Matrix scores_;
};

class TeacherModel {
 public:
  TeacherModel(const TeacherConfig& config, std::uint64_t seed);
  ~TeacherModel();
  TeacherModel(TeacherModel&&) noexcept;
  TeacherModel& operator=(TeacherModel&&) noexcept;

  const TeacherConfig& config() const noexcept { return config_; }

  // images: [N, 1, S, S] -> logits [N, classes]
  nn::Var forward_train(const nn::Var& images);
  nn::Var forward(const nn::Var& images) const;

  nn::ParameterSet parameters();
  std::size_t parameter_count();

  struct Impl;

 private:
  TeacherConfig config_;
  std::unique_ptr<Impl> impl_;
};

class StudentModel {
 public:
  StudentModel(const StudentConfig& config, std::uint64_t seed);
  ~StudentModel();
  StudentModel(StudentModel&&) noexcept;
  StudentModel& operator=(StudentModel&&) noexcept;

  const StudentConfig& config() const noexcept { return config_; }

  // images: [N, 1, H, W] -> logits [n_seq, N, classes]
  nn::Var forward_train(const nn::Var& images);
  nn::Var forward(const nn::Var& images) const;

  nn::ParameterSet parameters();
  std::size_t parameter_count();

  struct Impl;

 private:
  StudentConfig config_;
  std::unique_ptr<Impl> impl_;
};

// Packs same-sized images into an [N, 1, H, W] tensor.
nn::Tensor images_to_tensor(std::span<const GrayImage* const> images);
nn::Tensor image_to_tensor(const GrayImage& image);

// Logits over the teacher's classes for one glyph crop of the configured size.
std::vector<double> teacher_forward(const TeacherModel& teacher, const GrayImage& image);

// Student scores for one word image of the configured height. Throws
// "input too narrow" when the width yields fewer than n_seq feature columns.
LogitSequence student_forward(const StudentModel& student, const GrayImage& image);

// Splits a [T, N, K] logits tensor into per-sample sequences.
std::vector<LogitSequence> split_batch_logits(const nn::Tensor& logits);

// --- checkpoints -------------------------------------------------------------
//
// Binary container, little endian:
//   8 bytes  magic "STKDCKPT"
//   u32      format version (1)
//   u64      metadata length, then UTF-8 JSON metadata (config echo etc.)
//   u32      tensor count, then per tensor:
//            u32 name length, name bytes, u32 rank, rank x i32 dims,
//            product(dims) x f64 values

constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::ordered_json meta;
  std::vector<std::pair<std::string, nn::Tensor>> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint capture_parameters(nn::ParameterSet params, nlohmann::ordered_json meta);
// Copies tensors into the set by name; every name and shape must match.
void restore_parameters(const Checkpoint& ckpt, nn::ParameterSet params);

struct LoadedTeacher {
  TeacherModel model;
  GraphemeInventory inventory;
  nlohmann::ordered_json meta;
};

struct LoadedStudent {
  StudentModel model;
  GraphemeInventory inventory;  // training inventory with training supports
  nlohmann::ordered_json meta;
};

void save_teacher(const std::filesystem::path& path, TeacherModel& model, const GraphemeInventory& inventory,
                  nlohmann::ordered_json extra = nlohmann::ordered_json::object());
LoadedTeacher load_teacher(const std::filesystem::path& path);

void save_student(const std::filesystem::path& path, StudentModel& model, const GraphemeInventory& inventory,
                  nlohmann::ordered_json extra = nlohmann::ordered_json::object());
LoadedStudent load_student(const std::filesystem::path& path);

}  // namespace stackkd
