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

#include "stackkd/harness/toy.hpp"

#include "stackkd/common.hpp"
#include "stackkd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stackkd {

namespace fs = std::filesystem;

std::vector<std::string> toy_script_graphemes(std::size_t n) {
  static const char* const kLetters[] = {
      "ক", "খ", "গ", "ঘ", "চ", "ছ", "জ", "ঝ", "ট", "ঠ", "ড", "ঢ", "ণ", "ত", "থ", "দ",
      "ধ", "ন", "প", "ফ", "ব", "ভ", "ম", "য", "র", "ল", "শ", "ষ", "স", "হ", "ঙ", "ঞ"};
  constexpr std::size_t kCount = sizeof kLetters / sizeof kLetters[0];
  if (n > kCount) throw Error("toy script has at most " + std::to_string(kCount) + " letters");
  return {kLetters, kLetters + n};
}

void ToyCorpusSpec::validate() const {
  if (graphemes.empty()) throw Error("toy corpus needs graphemes");
  if (!weights.empty() && weights.size() != graphemes.size()) throw Error("one weight per grapheme expected");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weights must be finite and non-negative");
  if (min_length < 1 || max_length < min_length) throw Error("invalid word length range");
  if (num_writers < 1) throw Error("num_writers must be >= 1");
  if (height < 8 || width < 8) throw Error("image too small");
}

WriterStyle make_writer_style(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WriterStyle s;
  s.glyph_height = 21.0 + 5.0 * u(rng);
  s.aspect = 0.75 + 0.3 * u(rng);
  s.spacing = 0.5 + 3.0 * u(rng);
  s.pen_radius = 0.9 + 0.6 * u(rng);
  s.rotation_deg = -4.0 + 8.0 * u(rng);
  s.jitter = 0.5 + 1.5 * u(rng);
  return s;
}

GrayImage render_word(const GraphemeSequence& word, const WriterStyle& style, std::mt19937_64& rng,
                      int height, int width, double noise, bool fill_line) {
  if (word.empty()) throw Error("cannot render an empty word");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double gh = style.glyph_height * height / 32.0;
  const double margin = 2.0;
  const double n = static_cast<double>(word.size());
  double gw = gh * style.aspect;
  double advance = gw + style.spacing;
  int canvas_w = static_cast<int>(std::ceil(2 * margin + n * advance));
  if (fill_line) {
    canvas_w = width;
    advance = (width - 2 * margin) / n;
    gw = std::min(advance - style.spacing, 2.5 * gh);
  }
  GrayImage canvas(height, std::max(canvas_w, 1));
  double x = margin + (advance - style.spacing - gw) / 2;
  for (const auto& g : word) {
    const double scale = 1.0 + 0.06 * u(rng);
    const double y0 = (height - gh * scale) / 2.0 + style.jitter * u(rng);
    rasterize_skeleton(procedural_skeleton(g), canvas, x, y0, gw * scale, gh * scale, style.pen_radius);
    x += advance + 0.5 * u(rng);
  }
  if (style.rotation_deg != 0.0) canvas = affine_warp(canvas, style.rotation_deg, 1.0, 0.0, 0.0);
  GrayImage out = canvas.width() == width ? std::move(canvas) : fit_and_pad(canvas, height, width);
  if (noise > 0) {
    std::normal_distribution<double> nd(0.0, noise);
    for (auto& v : out.pixels()) v += nd(rng);
  }
  out.clamp01();
  return out;
}

std::vector<WordRecord> generate_toy_corpus(const fs::path& dir, const ToyCorpusSpec& spec) {
  spec.validate();
  std::vector<double> cdf;
  double total = 0.0;
  for (std::size_t i = 0; i < spec.graphemes.size(); ++i) {
    total += spec.weights.empty() ? 1.0 : spec.weights[i];
    cdf.push_back(total);
  }
  if (total <= 0.0) throw Error("weights sum to zero");

  std::vector<Grapheme> alphabet;
  for (const auto& s : spec.graphemes) {
    auto gs = extract_graphemes(normalize_text(s));
    if (gs.size() != 1) throw Error("toy grapheme '" + s + "' is not a single grapheme");
    alphabet.push_back(gs.front());
  }
  std::vector<WriterStyle> writers;
  for (int w = 0; w < spec.num_writers; ++w)
    writers.push_back(make_writer_style(mix_seed(spec.writer_seed, static_cast<std::uint64_t>(w))));

  fs::create_directories(dir / "images");
  std::mt19937_64 content(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<WordRecord> records;
  for (std::size_t i = 0; i < spec.num_words; ++i) {
    const int len = spec.min_length + static_cast<int>(content() % static_cast<std::uint64_t>(
                                                           spec.max_length - spec.min_length + 1));
    GraphemeSequence word;
    for (int k = 0; k < len; ++k) {
      const double r = u01(content) * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
      word.push_back(alphabet[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), alphabet.size() - 1)]);
    }
    const std::size_t writer = content() % writers.size();
    std::mt19937_64 pen(mix_seed(spec.writer_seed, writer, i));
    GrayImage img = render_word(word, writers[writer], pen, spec.height, spec.width, spec.noise, spec.fill_line);

    char name[64];
    std::snprintf(name, sizeof name, "images/%s%06zu.png", spec.prefix.c_str(), i);
    write_png(dir / name, img);
    WordRecord r;
    r.image_path = name;
    r.resolved = dir / name;
    r.label = join_graphemes(word);
    r.graphemes = std::move(word);
    r.split = spec.split;
    records.push_back(std::move(r));
  }
  write_manifest(dir / "manifest.jsonl", records);
  return records;
}

}  // namespace stackkd
