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

// Balanced synthetic isolated-glyph data for training the character teacher.

#pragma once

#include "stackkd/grapheme.hpp"
#include "stackkd/image.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace stackkd {

class UnrenderableGrapheme : public Error {
 public:
  explicit UnrenderableGrapheme(const Grapheme& g)
      : Error("unrenderable grapheme: '" + g.text() + "'"), grapheme_(g) {}
  const Grapheme& grapheme() const noexcept { return grapheme_; }

 private:
  Grapheme grapheme_;
};

struct Point {
  double x = 0;
  double y = 0;
};

// Quadratic Bezier stroke in the unit square (y grows downwards).
struct Stroke {
  Point from;
  Point control;
  Point to;
};

using GlyphSkeleton = std::vector<Stroke>;

// Deterministic stroke pattern for a grapheme, the union of per-code-point
// stroke sets, so conjuncts share strokes with their components. Throws
// UnrenderableGrapheme for graphemes with no visible code point.
GlyphSkeleton procedural_skeleton(const Grapheme& g);

// Draws the skeleton into the box [x0, x0 + w) x [y0, y0 + h) of `canvas`
// with the given pen radius in pixels. Ink accumulates with max().
void rasterize_skeleton(const GlyphSkeleton& skeleton, GrayImage& canvas, double x0, double y0,
                        double w, double h, double pen_radius);

class GlyphRenderer {
 public:
  virtual ~GlyphRenderer() = default;
  virtual std::string name() const = 0;
  // Clean, unaugmented size x size raster of `g`.
  virtual GrayImage render(const Grapheme& g, int size) const = 0;
};

class ProceduralGlyphRenderer final : public GlyphRenderer {
 public:
  std::string name() const override { return "procedural"; }
  GrayImage render(const Grapheme& g, int size) const override;
};

using RendererFactory = std::function<std::unique_ptr<GlyphRenderer>()>;

// Font-backed renderers plug in here. "procedural" is always registered.
void register_renderer(const std::string& name, RendererFactory factory);
std::unique_ptr<GlyphRenderer> make_renderer(const std::string& name);

struct Augmentation {
  double rotation_deg = 10.0;  // uniform in [-r, r]
  double scale_min = 0.9;
  double scale_max = 1.1;
  double translate_px = 2.0;  // uniform in [-t, t] on each axis
  double noise = 0.05;        // standard deviation of additive Gaussian noise

  static Augmentation none() { return {0, 1, 1, 0, 0}; }
};

struct RenderSpec {
  std::string renderer = "procedural";
  int per_class_count = 160;
  Augmentation augmentation;
  std::uint64_t seed = 0;
  int resolution = 32;

  void validate() const;
};

struct GlyphSample {
  GrayImage image;
  Grapheme label;
  std::uint64_t seed = 0;
  int index = 0;  // instance index within the class
};

GlyphSample render_glyph(const Grapheme& g, const RenderSpec& spec, int instance_index);
GlyphSample render_glyph(const Grapheme& g, const RenderSpec& spec, int instance_index,
                         const GlyphRenderer& renderer);

// Exactly spec.per_class_count samples per inventory class, in inventory
// order and then instance order.
std::vector<GlyphSample> generate_teacher_dataset(const GraphemeInventory& inv, const RenderSpec& spec);

// Writes `<dir>/images/<n>.png` plus `<dir>/manifest.jsonl` with fields
// image_path (relative to dir), label, seed, index.
void write_glyph_dataset(const std::filesystem::path& dir, const std::vector<GlyphSample>& samples);
std::vector<GlyphSample> read_glyph_dataset(const std::filesystem::path& dir);

// Order-sensitive checksum over labels, seeds and quantized pixels.
std::uint64_t dataset_checksum(const std::vector<GlyphSample>& samples);

}  // namespace stackkd
