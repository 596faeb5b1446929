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

// Synthetic handwriting-style word corpora built from procedural glyph
// skeletons: each word is drawn by one of a few seeded "writers".

#pragma once

#include "stackkd/harness/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace stackkd {

// The first n letters of a fixed Bengali consonant list (n <= 32).
std::vector<std::string> toy_script_graphemes(std::size_t n);

struct ToyCorpusSpec {
  std::vector<std::string> graphemes;
  std::vector<double> weights;  // sampling weight per grapheme; empty = uniform
  std::size_t num_words = 200;
  int min_length = 2;
  int max_length = 4;
  std::uint64_t seed = 1;         // word contents
  std::uint64_t writer_seed = 1;  // handwriting styles
  int num_writers = 8;
  int height = 32;
  int width = 128;
  double noise = 0.03;
  bool fill_line = true;          // spread each word over the full width
  std::string split;              // tag written to every record
  std::string prefix = "w";

  void validate() const;
};

struct WriterStyle {
  double glyph_height = 24.0;
  double aspect = 0.9;  // glyph width / height
  double spacing = 1.5;
  double pen_radius = 1.1;
  double rotation_deg = 0.0;
  double jitter = 1.0;  // per-glyph vertical jitter in pixels
};

WriterStyle make_writer_style(std::uint64_t seed);

// With fill_line the word is laid out in equal cells across the whole width;
// otherwise glyphs keep the writer's aspect and the line is fitted and padded.
GrayImage render_word(const GraphemeSequence& word, const WriterStyle& style, std::mt19937_64& rng,
                      int height, int width, double noise, bool fill_line = true);

// Writes images/<prefix>NNNNNN.png and manifest.jsonl under `dir`; returns
// the written records.
std::vector<WordRecord> generate_toy_corpus(const std::filesystem::path& dir, const ToyCorpusSpec& spec);

}  // namespace stackkd
