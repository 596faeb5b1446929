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

#include "stackkd/harness/dataset.hpp"

#include "stackkd/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace stackkd {

namespace fs = std::filesystem;

std::vector<std::string> WordDatasetManifest::labels() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

std::vector<std::size_t> WordDatasetManifest::indices_with_split(const std::string& split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].split == split) out.push_back(i);
  return out;
}

bool WordDatasetManifest::has_split_tags() const {
  return std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.split.empty(); });
}

WordDatasetManifest load_manifest(const fs::path& path, bool check_images) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  WordDatasetManifest m;
  m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::string line;
  std::size_t lineno = 0;
  std::uint64_t h = fnv1a64("");
  std::vector<std::string> missing;
  std::map<std::string, std::string> split_of;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& why) -> Error {
      return Error(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("malformed line");
    }
    if (!j.is_object() || !j.contains("image_path") || !j.contains("label") || !j["image_path"].is_string() ||
        !j["label"].is_string())
      throw fail("expected string fields image_path and label");
    WordRecord r;
    r.image_path = j["image_path"].get<std::string>();
    if (j.contains("split")) {
      if (!j["split"].is_string()) throw fail("split must be a string");
      r.split = j["split"].get<std::string>();
      if (r.split != "train" && r.split != "val" && r.split != "test") throw fail("unknown split '" + r.split + "'");
    }
    try {
      r.label = normalize_text(j["label"].get<std::string>());
      r.graphemes = extract_graphemes(r.label);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    if (r.graphemes.empty()) throw fail("empty label");
    auto [it, fresh] = split_of.emplace(r.image_path, r.split);
    if (!fresh && it->second != r.split) throw fail("image " + r.image_path + " appears in two splits");
    const fs::path p(r.image_path);
    r.resolved = p.is_absolute() ? p : m.root / p;
    if (check_images && !fs::is_regular_file(r.resolved)) missing.push_back(r.image_path);
    h = fnv1a64(r.image_path + '\t' + r.label + '\t' + r.split + '\n', h);
    m.records.push_back(std::move(r));
  }
  if (!missing.empty()) {
    std::string msg = "unresolvable images in " + path.string() + ":";
    for (const auto& s : missing) msg += " " + s;
    throw Error(msg);
  }
  m.checksum = h;
  return m;
}

void write_manifest(const fs::path& path, const std::vector<WordRecord>& records) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j{{"image_path", r.image_path}, {"label", r.label}};
    if (!r.split.empty()) j["split"] = r.split;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

GrayImage load_word_image(const WordRecord& record, int height, int width) {
  GrayImage img = read_png(record.resolved);
  if (img.height() == height && img.width() == width) return img;
  return fit_and_pad(img, height, width);
}

Partition partition_records(const std::vector<std::size_t>& candidates, double val_fraction,
                            std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw Error("val_fraction must be in [0, 1)");
  std::vector<std::size_t> order = candidates;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::size_t n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(order.size())));
  if (n_val >= order.size()) n_val = order.empty() ? 0 : order.size() - 1;
  Partition p;
  p.seed = seed;
  p.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  p.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(p.val.begin(), p.val.end());
  std::sort(p.train.begin(), p.train.end());
  return p;
}

nlohmann::ordered_json partition_to_json(const Partition& p) {
  return {{"seed", p.seed}, {"train", p.train}, {"val", p.val}};
}

Partition partition_from_json(const nlohmann::ordered_json& j) {
  Partition p;
  p.seed = j.at("seed").get<std::uint64_t>();
  p.train = j.at("train").get<std::vector<std::size_t>>();
  p.val = j.at("val").get<std::vector<std::size_t>>();
  return p;
}

}  // namespace stackkd
