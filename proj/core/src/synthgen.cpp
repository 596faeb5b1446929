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

#include "stackkd/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

namespace stackkd {

namespace {

bool is_invisible(char32_t c) {
  return c < 0x20 || (c >= 0x7F && c <= 0xA0) || c == 0x0085 || (c >= 0x2000 && c <= 0x200F) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

double unit(std::uint64_t& state) {
  state = mix_seed(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

// Strokes contributed by a single code point. Base letters get three strokes,
// signs and marks one or two smaller ones placed around the body.
void codepoint_strokes(char32_t c, GlyphSkeleton& out) {
  std::uint64_t state = mix_seed(0x5eed5eedULL, static_cast<std::uint64_t>(c));
  const bool mark = (c >= 0x0981 && c <= 0x0983) || (c >= 0x09BC && c <= 0x09D7) || c == 0x09CD;
  const int n = mark ? 1 + static_cast<int>(unit(state) * 2) : 3;
  // Anchor grid: 5 x 5 lattice inside [0.15, 0.85].
  auto anchor = [&] {
    const int gx = static_cast<int>(unit(state) * 5);
    const int gy = static_cast<int>(unit(state) * 5);
    return Point{0.15 + 0.175 * gx, 0.15 + 0.175 * gy};
  };
  for (int i = 0; i < n; ++i) {
    Point a = anchor();
    Point b = anchor();
    if (std::abs(a.x - b.x) + std::abs(a.y - b.y) < 0.2) b = Point{1.0 - a.x, 1.0 - a.y};
    if (mark) {
      // Marks live in a band above the body or to its right.
      const bool top = unit(state) < 0.5;
      auto squeeze = [&](Point p) {
        return top ? Point{p.x, 0.05 + 0.25 * p.y} : Point{0.7 + 0.25 * p.x, p.y};
      };
      a = squeeze(a);
      b = squeeze(b);
    }
    const double bend = (unit(state) - 0.5) * 0.6;
    const Point mid{(a.x + b.x) / 2 - bend * (b.y - a.y), (a.y + b.y) / 2 + bend * (b.x - a.x)};
    out.push_back({a, mid, b});
  }
}

Point bezier(const Stroke& s, double t) {
  const double u = 1 - t;
  return {u * u * s.from.x + 2 * u * t * s.control.x + t * t * s.to.x,
          u * u * s.from.y + 2 * u * t * s.control.y + t * t * s.to.y};
}

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, RendererFactory>& registry() {
  static std::map<std::string, RendererFactory> r{
      {"procedural", [] { return std::make_unique<ProceduralGlyphRenderer>(); }}};
  return r;
}

std::uint64_t grapheme_hash(const Grapheme& g) { return fnv1a64(g.text()); }

}  // namespace

GlyphSkeleton procedural_skeleton(const Grapheme& g) {
  GlyphSkeleton out;
  for (char32_t c : g.codepoints()) {
    if (is_invisible(c)) {
      if (c == 0x200C || c == 0x200D) continue;  // joiners only steer shaping
      throw UnrenderableGrapheme(g);
    }
    codepoint_strokes(c, out);
  }
  if (out.empty()) throw UnrenderableGrapheme(g);
  return out;
}

void rasterize_skeleton(const GlyphSkeleton& skeleton, GrayImage& canvas, double x0, double y0,
                        double w, double h, double pen_radius) {
  constexpr int kSegments = 12;
  for (const auto& stroke : skeleton) {
    Point prev = bezier(stroke, 0);
    prev = {x0 + prev.x * w, y0 + prev.y * h};
    for (int k = 1; k <= kSegments; ++k) {
      Point cur = bezier(stroke, static_cast<double>(k) / kSegments);
      cur = {x0 + cur.x * w, y0 + cur.y * h};
      const int ylo = std::max(0, static_cast<int>(std::floor(std::min(prev.y, cur.y) - pen_radius - 1)));
      const int yhi = std::min(canvas.height() - 1,
                               static_cast<int>(std::ceil(std::max(prev.y, cur.y) + pen_radius + 1)));
      const int xlo = std::max(0, static_cast<int>(std::floor(std::min(prev.x, cur.x) - pen_radius - 1)));
      const int xhi = std::min(canvas.width() - 1,
                               static_cast<int>(std::ceil(std::max(prev.x, cur.x) + pen_radius + 1)));
      for (int y = ylo; y <= yhi; ++y) {
        for (int x = xlo; x <= xhi; ++x) {
          const double d = segment_distance({x + 0.5, y + 0.5}, prev, cur);
          const double ink = std::clamp(pen_radius + 0.5 - d, 0.0, 1.0);
          if (ink > canvas.at(y, x)) canvas.at(y, x) = ink;
        }
      }
      prev = cur;
    }
  }
}

GrayImage ProceduralGlyphRenderer::render(const Grapheme& g, int size) const {
  const GlyphSkeleton skeleton = procedural_skeleton(g);
  GrayImage canvas(size, size);
  const double margin = size * 0.1;
  rasterize_skeleton(skeleton, canvas, margin, margin, size - 2 * margin, size - 2 * margin,
                     std::max(0.8, size / 24.0));
  return canvas;
}

void register_renderer(const std::string& name, RendererFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<GlyphRenderer> make_renderer(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) throw Error("unknown glyph renderer: " + name);
  return it->second();
}

void RenderSpec::validate() const {
  if (per_class_count < 1) throw Error("per_class_count must be >= 1");
  if (resolution < 4) throw Error("resolution must be >= 4");
  const auto& a = augmentation;
  for (double v : {a.rotation_deg, a.scale_min, a.scale_max, a.translate_px, a.noise})
    if (!std::isfinite(v)) throw Error("augmentation ranges must be finite");
  if (a.scale_min <= 0 || a.scale_max < a.scale_min) throw Error("invalid scale range");
  if (a.rotation_deg < 0 || a.translate_px < 0 || a.noise < 0)
    throw Error("augmentation ranges must be non-negative");
}

GlyphSample render_glyph(const Grapheme& g, const RenderSpec& spec, int instance_index) {
  return render_glyph(g, spec, instance_index, *make_renderer(spec.renderer));
}

GlyphSample render_glyph(const Grapheme& g, const RenderSpec& spec, int instance_index,
                         const GlyphRenderer& renderer) {
  spec.validate();
  if (instance_index < 0 || instance_index >= spec.per_class_count)
    throw Error("instance index out of range");
  GlyphSample out;
  out.label = g;
  out.index = instance_index;
  out.seed = mix_seed(spec.seed, grapheme_hash(g), static_cast<std::uint64_t>(instance_index));

  GrayImage clean = renderer.render(g, spec.resolution);
  const auto& a = spec.augmentation;
  std::mt19937_64 rng(out.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double rot = (2 * u01(rng) - 1) * a.rotation_deg;
  const double scale = a.scale_min + u01(rng) * (a.scale_max - a.scale_min);
  const double dx = (2 * u01(rng) - 1) * a.translate_px;
  const double dy = (2 * u01(rng) - 1) * a.translate_px;
  out.image = (rot == 0 && scale == 1 && dx == 0 && dy == 0) ? clean : affine_warp(clean, rot, scale, dx, dy);
  if (a.noise > 0) {
    std::normal_distribution<double> noise(0.0, a.noise);
    for (auto& v : out.image.pixels()) v += noise(rng);
  }
  out.image.clamp01();
  if (out.image.max_value() <= 0.5) throw UnrenderableGrapheme(g);
  return out;
}

std::vector<GlyphSample> generate_teacher_dataset(const GraphemeInventory& inv, const RenderSpec& spec) {
  if (inv.empty()) throw Error("empty inventory");
  spec.validate();
  auto renderer = make_renderer(spec.renderer);
  std::vector<GlyphSample> out;
  out.reserve(inv.size() * static_cast<std::size_t>(spec.per_class_count));
  for (const auto& e : inv.entries())
    for (int i = 0; i < spec.per_class_count; ++i) out.push_back(render_glyph(e.grapheme, spec, i, *renderer));
  return out;
}

void write_glyph_dataset(const std::filesystem::path& dir, const std::vector<GlyphSample>& samples) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw Error("cannot write " + (dir / "manifest.jsonl").string());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "images/%07zu.png", i);
    write_png(dir / name, samples[i].image);
    nlohmann::ordered_json row;
    row["image_path"] = name;
    row["label"] = samples[i].label.text();
    row["seed"] = samples[i].seed;
    row["index"] = samples[i].index;
    manifest << row.dump() << '\n';
  }
}

std::vector<GlyphSample> read_glyph_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw Error("cannot open " + (dir / "manifest.jsonl").string());
  std::vector<GlyphSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto row = nlohmann::json::parse(line);
      GlyphSample s;
      s.image = read_png(dir / row.at("image_path").get<std::string>());
      s.label = Grapheme(row.at("label").get<std::string>());
      s.seed = row.at("seed").get<std::uint64_t>();
      s.index = row.at("index").get<int>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error("glyph manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::uint64_t dataset_checksum(const std::vector<GlyphSample>& samples) {
  std::uint64_t h = fnv1a64("");
  for (const auto& s : samples) {
    h = fnv1a64(s.label.text(), h);
    h = mix_seed(h, s.seed, static_cast<std::uint64_t>(s.index));
    std::string bytes;
    bytes.reserve(s.image.pixels().size());
    for (double v : s.image.pixels()) bytes += static_cast<char>(std::lround(v * 255.0));
    h = fnv1a64(bytes, h);
  }
  return h;
}

}  // namespace stackkd
