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

// Word-image manifests (JSON lines) and seeded train/validation partitions.

#pragma once

#include "stackkd/grapheme.hpp"
#include "stackkd/image.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stackkd {

struct WordRecord {
  std::string image_path;           // as written in the manifest
  std::filesystem::path resolved;   // relative paths resolve against the manifest directory
  std::string label;                // normalized
  GraphemeSequence graphemes;
  std::string split;                // "", "train", "val" or "test"
};

struct WordDatasetManifest {
  std::filesystem::path root;
  std::vector<WordRecord> records;
  std::uint64_t checksum = 0;

  std::vector<std::string> labels() const;
  // Records with the given split tag; an empty tag selects untagged records.
  std::vector<std::size_t> indices_with_split(const std::string& split) const;
  bool has_split_tags() const;
};

// One {"image_path": ..., "label": ...[, "split": ...]} object per line; blank
// lines are ignored. Throws on malformed lines (with line number) and lists
// every image path that does not resolve.
WordDatasetManifest load_manifest(const std::filesystem::path& path, bool check_images = true);
void write_manifest(const std::filesystem::path& path, const std::vector<WordRecord>& records);

GrayImage load_word_image(const WordRecord& record, int height, int width);

struct Partition {
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Seeded split of `candidates` into train / validation, each sorted.
Partition partition_records(const std::vector<std::size_t>& candidates, double val_fraction,
                            std::uint64_t seed);
nlohmann::ordered_json partition_to_json(const Partition& p);
Partition partition_from_json(const nlohmann::ordered_json& j);

}  // namespace stackkd
