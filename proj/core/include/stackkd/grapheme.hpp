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

// Unicode normalization, grapheme-cluster extraction and grapheme inventories
// for Bengali-script word labels.

#pragma once

#include "stackkd/common.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stackkd {

std::u32string utf8_to_u32(std::string_view text);
std::string u32_to_utf8(std::u32string_view text);

// One recognition class: an independent letter, a dependent sign, or a fused
// conjunct. Stored as UTF-8; byte order of UTF-8 equals code point order, so
// the defaulted comparison orders graphemes by code point sequence.
class Grapheme {
 public:
  Grapheme() = default;
  explicit Grapheme(std::string utf8) : text_(std::move(utf8)) {}

  const std::string& text() const noexcept { return text_; }
  std::u32string codepoints() const { return utf8_to_u32(text_); }
  bool empty() const noexcept { return text_.empty(); }

  auto operator<=>(const Grapheme&) const = default;

 private:
  std::string text_;
};

using GraphemeSequence = std::vector<Grapheme>;

std::string join_graphemes(std::span<const Grapheme> graphemes);

// Rewrite table mapping alternative spellings to one canonical spelling.
// Rules are applied longest-match-first, left to right, until a fixed point.
class NormalizationRules {
 public:
  struct Rule {
    std::u32string from;
    std::u32string to;
  };

  NormalizationRules() = default;
  explicit NormalizationRules(std::vector<Rule> rules);

  // Composition pairs, nukta forms and legacy spellings for Bengali.
  static const NormalizationRules& bengali_default();

  // TSV: `from_codepoints<TAB>to_codepoints`, code points as space separated
  // hex. Lines starting with '#' and blank lines are ignored.
  static NormalizationRules parse_tsv(std::string_view text);
  static NormalizationRules load_tsv(const std::filesystem::path& path);
  std::string to_tsv() const;

  std::u32string apply(std::u32string_view text) const;
  std::span<const Rule> rules() const noexcept { return rules_; }

 private:
  std::vector<Rule> rules_;
  std::size_t longest_ = 0;
};

// Canonical spelling under `rules` (the built-in Bengali table by default).
std::string normalize_text(std::string_view raw);
std::string normalize_text(std::string_view raw, const NormalizationRules& rules);

// Splits a normalized label into graphemes. Concatenating the result
// reproduces the label exactly.
GraphemeSequence extract_graphemes(std::string_view label);

struct InventoryEntry {
  Grapheme grapheme;
  std::size_t index = 0;
  std::uint64_t support = 0;
};

// Ordered grapheme classes with 0-based contiguous indices and support counts.
// The CTC blank is not part of an inventory.
class GraphemeInventory {
 public:
  GraphemeInventory() = default;

  // Orders by descending support, ties by code point order.
  static GraphemeInventory from_counts(const std::map<Grapheme, std::uint64_t>& counts,
                                       std::string source_tag = {});
  // Keeps the given order; indices follow vector position.
  static GraphemeInventory from_entries(std::vector<InventoryEntry> entries,
                                        std::string source_tag = {});

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const InventoryEntry> entries() const noexcept { return entries_; }
  const InventoryEntry& at(std::size_t index) const { return entries_.at(index); }
  std::optional<std::size_t> index_of(const Grapheme& g) const;
  bool contains(const Grapheme& g) const { return index_of(g).has_value(); }
  std::uint64_t support(const Grapheme& g) const;
  std::uint64_t max_support() const noexcept;
  std::uint64_t total_support() const noexcept;
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::vector<Grapheme> graphemes() const;

  // Encodes a grapheme sequence as class indices; throws on unknown graphemes.
  std::vector<int> encode(std::span<const Grapheme> seq) const;
  GraphemeSequence decode(std::span<const int> indices) const;

  // Stable content hash over (grapheme, index, support) rows.
  std::uint64_t fingerprint() const;

  // TSV: `grapheme<TAB>index<TAB>support`, one row per class.
  std::string to_tsv() const;
  static GraphemeInventory parse_tsv(std::string_view text, std::string source_tag = {});
  void save_tsv(const std::filesystem::path& path) const;
  static GraphemeInventory load_tsv(const std::filesystem::path& path);

  friend bool operator==(const GraphemeInventory& a, const GraphemeInventory& b);

 private:
  std::vector<InventoryEntry> entries_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::string source_tag_;
};

bool operator==(const InventoryEntry& a, const InventoryEntry& b);

GraphemeInventory build_inventory(std::span<const std::string> labels, std::string source_tag = {});

struct MinorMajorSplit {
  std::set<Grapheme> minor;
  std::set<Grapheme> major;
};

// A class is minor iff its support is strictly below 10% of the largest support.
MinorMajorSplit split_minor_major(const GraphemeInventory& inv);
bool is_minor_support(std::uint64_t support, std::uint64_t max_support);

// Union of the two entry sets with summed supports, re-ordered.
GraphemeInventory merge_inventories(const GraphemeInventory& a, const GraphemeInventory& b);

}  // namespace stackkd
