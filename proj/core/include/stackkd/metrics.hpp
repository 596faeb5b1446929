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

// Recognition metrics over grapheme sequences: edit distance, NED, CRR, WRR
// and alignment-based per-class F1 with minority/majority macro averages.

#pragma once

#include "stackkd/common.hpp"
#include "stackkd/grapheme.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stackkd {

// Unit-cost Levenshtein distance.
template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t edit_distance(const GraphemeSequence& a, const GraphemeSequence& b) {
  return edit_distance<Grapheme>(a, b);
}

struct PredictionPair {
  GraphemeSequence pred;
  GraphemeSequence label;
};

// 100 * max(0, 1 - ED / |label|)
double crr(const GraphemeSequence& pred, const GraphemeSequence& label);
double wrr(std::span<const PredictionPair> pairs);

struct NedResult {
  std::uint64_t total = 0;
  double normalized = 0.0;  // sum ED / sum |label|
};
NedResult ned(std::span<const PredictionPair> pairs);

enum class AlignOp { match, substitute, del, insert };

struct AlignStep {
  AlignOp op;
  std::size_t pred_pos;   // valid for match/substitute/insert
  std::size_t label_pos;  // valid for match/substitute/del
};

// Minimal-cost alignment of pred against label. Among optimal paths the
// traceback prefers match, then substitute, then delete, then insert.
std::vector<AlignStep> align(const GraphemeSequence& pred, const GraphemeSequence& label);

struct ClassScore {
  Grapheme grapheme;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // percent
  std::uint64_t support = 0;                       // occurrences in evaluation labels
  bool minor = false;
};

struct F1Summary {
  std::vector<ClassScore> per_class;  // sorted by grapheme code points
  double f1_all = 0.0, f1_minor = 0.0, f1_major = 0.0;
};

// Classes listed in split.major are majority classes; every other class seen in
// the evaluation (including graphemes unknown to training) counts as minority.
F1Summary per_class_f1(std::span<const PredictionPair> pairs, const MinorMajorSplit& split);

struct EvalReport {
  std::uint64_t ned_total = 0;
  double ned_normalized = 0.0;
  double crr = 0.0;  // mean per-word CRR
  double wrr = 0.0;
  double f1_all = 0.0, f1_minor = 0.0, f1_major = 0.0;
  std::size_t num_words = 0;
  std::vector<ClassScore> per_class;
};

EvalReport evaluate_pairs(std::span<const PredictionPair> pairs, const MinorMajorSplit& split);

nlohmann::ordered_json report_to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::ordered_json& j);

// Column order NED, CRR, WRR, F1-all, F1-minor, F1-major.
std::string summary_tsv_header();
std::string summary_tsv_row(const std::string& name, const EvalReport& r);
std::string summary_markdown_header();
std::string summary_markdown_row(const std::string& name, const EvalReport& r);

}  // namespace stackkd
