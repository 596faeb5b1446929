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

// Temperature softening, verified teacher sampling, prediction stacking and the
// two distillation losses (stacked-teacher and sequence-teacher).

#pragma once

#include "stackkd/common.hpp"
#include "stackkd/grapheme.hpp"
#include "stackkd/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stackkd {

enum class KdMode { none, conventional, lila, super };
enum class KdWeightMode { paper, hinton };

std::string to_string(KdMode m);
std::string to_string(KdWeightMode m);
KdMode parse_kd_mode(std::string_view s);
KdWeightMode parse_kd_weight_mode(std::string_view s);

struct DistillConfig {
  double alpha = 0.5;
  double tau = 2.0;
  KdMode kd_mode = KdMode::none;
  KdWeightMode kd_weight_mode = KdWeightMode::paper;
  int retry_cap = 16;

  void validate() const;
  double ctc_weight() const { return 1.0 - alpha; }
  // paper: tau^2 + alpha; hinton: alpha * tau^2
  double kd_weight() const;
};

void to_json(nlohmann::ordered_json& j, const DistillConfig& c);
void from_json(const nlohmann::ordered_json& j, DistillConfig& c);

// softmax(logits / tau)
std::vector<double> soften(std::span<const double> logits, double tau);
Matrix soften_rows(const Matrix& logits, double tau);

// Glyph samples grouped by label, for drawing teacher inputs.
class GlyphPool {
 public:
  GlyphPool() = default;
  explicit GlyphPool(std::vector<GlyphSample> samples);

  std::size_t size() const { return samples_.size(); }
  const GlyphSample& at(std::size_t i) const { return samples_.at(i); }
  std::span<const std::size_t> indices_of(const Grapheme& g) const;

 private:
  std::vector<GlyphSample> samples_;
  std::map<Grapheme, std::vector<std::size_t>> by_label_;
};

// Raw teacher logits for pool sample `pool_index`.
using TeacherFn = std::function<std::vector<double>(std::size_t pool_index, const GlyphSample&)>;

struct TeacherSelection {
  std::vector<double> logits;        // raw teacher logits over G_T
  std::vector<double> distribution;  // soften(logits, tau)
  std::size_t sample_index = 0;      // pool index of the chosen sample
  int teacher_calls = 0;
  bool verified = false;             // false when the retry cap ran out
};

struct SelectionWarning {
  Grapheme grapheme;
  int attempts = 0;
  double best_mass = 0.0;
};

// Walks the samples of `g` in an order shuffled by `draw_seed` and returns the
// first one the teacher classifies as `teacher_class`. After `retry_cap`
// misses (or when the pool runs out) the candidate with the most mass on
// `teacher_class` is returned and a warning is appended.
TeacherSelection select_verified_teacher_sample(const Grapheme& g, std::size_t teacher_class,
                                                const TeacherFn& teacher, const GlyphPool& pool,
                                                int retry_cap, double tau, std::uint64_t draw_seed,
                                                std::vector<SelectionWarning>* warnings = nullptr);

// n_seq x (K + 1) row-stochastic targets; last column is the (zero) blank.
class TeacherStack {
 public:
  TeacherStack() = default;
  explicit TeacherStack(Matrix targets) : targets_(std::move(targets)) {}

  const Matrix& targets() const { return targets_; }
  int n_seq() const { return static_cast<int>(targets_.rows()); }
  int num_classes() const { return static_cast<int>(targets_.cols()); }

 private:
  Matrix targets_;
};

// Block i repeats grapheme i floor(n_seq / n_x) times; leftover rows repeat the
// last grapheme.
TeacherStack stack_teacher_outputs(std::span<const std::vector<double>> per_grapheme, int n_seq);

// Softmax over the teacher logits picked by `mapping` (student index ->
// teacher index), at temperature tau.
std::vector<double> project_super_teacher(std::span<const double> teacher_logits,
                                          std::span<const std::size_t> mapping, double tau = 1.0);

// Student index -> teacher index; every student grapheme must exist in the
// teacher inventory.
std::vector<std::size_t> build_class_mapping(const GraphemeInventory& student,
                                             const GraphemeInventory& teacher);

struct KdLoss {
  double total = 0.0;
  double ctc = 0.0;
  double kl = 0.0;
  Matrix grad;  // d total / d student logits; zero when infeasible
  bool feasible = true;
};

// Mean over rows of KL(target_row || soften(student_row, tau)) and its
// gradient with respect to the student logits.
double mean_kl_to_softened(const Matrix& targets, const Matrix& student_logits, double tau,
                           Matrix* grad = nullptr);

// w_ctc * CTC + w_kd * KL(stack || softened student).
KdLoss lila_boti_loss(const Matrix& student_logits, std::span<const int> target,
                      const TeacherStack& stack, const DistillConfig& cfg);

// Same weighting, KL between softened teacher and softened student rows.
KdLoss conventional_kd_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                            std::span<const int> target, const DistillConfig& cfg);

}  // namespace stackkd
