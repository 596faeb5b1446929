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

#include "stackkd/harness/protocol.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

namespace stackkd {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 6> kSlugs = {"no_kd",      "conventional", "lila_resnet18",
                                                    "super_resnet18", "lila_conv2",   "super_conv2"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string protocol_config_slug(std::string_view name) {
  for (std::size_t i = 0; i < kProtocolConfigs.size(); ++i)
    if (kProtocolConfigs[i] == name) return std::string(kSlugs[i]);
  throw Error("unknown protocol configuration: " + std::string(name));
}

std::string_view parse_protocol_config(std::string_view s) {
  for (std::size_t i = 0; i < kProtocolConfigs.size(); ++i)
    if (kProtocolConfigs[i] == s || kSlugs[i] == s) return kProtocolConfigs[i];
  throw Error("unknown protocol configuration: " + std::string(s));
}

void ProtocolConfig::validate() const {
  base.validate();
  if (manifest_a.empty() || manifest_b.empty()) throw Error("protocol needs two dataset manifests");
  if (name_a.empty() || name_b.empty() || name_a == name_b) throw Error("protocol dataset names must be distinct");
  for (const auto& c : configs) parse_protocol_config(c);
  conv2_teacher.validate();
  resnet_teacher.validate();
}

ProtocolConfig protocol_config_from_json(const nlohmann::ordered_json& j) {
  ProtocolConfig c;
  c.base = run_config_from_json(j);
  c.conv2_teacher.width = 0;
  c.resnet_teacher.width = 0;
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    try {
      if (p.contains("datasets")) {
        const auto& d = p.at("datasets");
        if (!d.is_array() || d.size() != 2) throw Error("protocol.datasets must list exactly two datasets");
        c.name_a = d[0].at("name").get<std::string>();
        c.manifest_a = d[0].at("manifest").get<std::string>();
        c.name_b = d[1].at("name").get<std::string>();
        c.manifest_b = d[1].at("manifest").get<std::string>();
      }
      if (p.contains("configs")) c.configs = p.at("configs").get<std::vector<std::string>>();
      if (p.contains("conv2_teacher")) from_json(p.at("conv2_teacher"), c.conv2_teacher);
      if (p.contains("resnet18_teacher")) from_json(p.at("resnet18_teacher"), c.resnet_teacher);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("invalid protocol configuration: ") + e.what());
    }
  }
  c.conv2_teacher.arch = TeacherArch::conv2;
  c.resnet_teacher.arch = TeacherArch::resnet18;
  return c;
}

nlohmann::ordered_json protocol_to_json(const ProtocolReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["complete"] = r.complete;
  if (!r.error.empty()) j["error"] = r.error;
  j["columns"] = {"NED", "CRR", "WRR", "F1-all", "F1-minor", "F1-major"};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    const auto& e = row.report;
    rows.push_back({{"train", row.train},
                    {"test", row.test},
                    {"config", row.config},
                    {"NED", e.ned_total},
                    {"CRR", e.crr},
                    {"WRR", e.wrr},
                    {"F1-all", e.f1_all},
                    {"F1-minor", e.f1_minor},
                    {"F1-major", e.f1_major},
                    {"ned_normalized", e.ned_normalized},
                    {"num_words", e.num_words},
                    {"unknown_occurrences", row.unknown_occurrences}});
  }
  j["rows"] = std::move(rows);
  return j;
}

ProtocolReport protocol_from_json(const nlohmann::ordered_json& j) {
  ProtocolReport r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    r.complete = j.at("complete").get<bool>();
    r.error = j.value("error", std::string());
    for (const auto& x : j.at("rows")) {
      ProtocolRow row;
      row.train = x.at("train").get<std::string>();
      row.test = x.at("test").get<std::string>();
      row.config = x.at("config").get<std::string>();
      row.report.ned_total = x.at("NED").get<std::uint64_t>();
      row.report.crr = x.at("CRR").get<double>();
      row.report.wrr = x.at("WRR").get<double>();
      row.report.f1_all = x.at("F1-all").get<double>();
      row.report.f1_minor = x.at("F1-minor").get<double>();
      row.report.f1_major = x.at("F1-major").get<double>();
      row.report.ned_normalized = x.value("ned_normalized", 0.0);
      row.report.num_words = x.value("num_words", std::size_t{0});
      row.unknown_occurrences = x.value("unknown_occurrences", std::uint64_t{0});
      r.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid protocol report: ") + e.what());
  }
  return r;
}

std::string render_report(const ProtocolReport& r, std::string_view format) {
  if (format == "json") return protocol_to_json(r).dump(2) + "\n";
  std::string out;
  if (format == "tsv") {
    out = "train\ttest\tconfig\tNED\tCRR\tWRR\tF1-all\tF1-minor\tF1-major\n";
    for (const auto& row : r.rows) {
      const auto& e = row.report;
      out += row.train + "\t" + row.test + "\t" + row.config + "\t" + std::to_string(e.ned_total) + "\t" +
             fmt(e.crr) + "\t" + fmt(e.wrr) + "\t" + fmt(e.f1_all) + "\t" + fmt(e.f1_minor) + "\t" +
             fmt(e.f1_major) + "\n";
    }
    return out;
  }
  if (format == "markdown") {
    out = "| Method | NED | CRR | WRR | F1-all | F1-minor | F1-major |\n"
          "|---|---:|---:|---:|---:|---:|---:|\n";
    std::string group;
    for (const auto& row : r.rows) {
      const std::string g = "Train: " + row.train + ", Test: " + row.test;
      if (g != group) {
        out += "| **" + g + "** | | | | | | |\n";
        group = g;
      }
      const auto& e = row.report;
      out += "| " + row.config + " | " + std::to_string(e.ned_total) + " | " + fmt(e.crr) + " | " + fmt(e.wrr) +
             " | " + fmt(e.f1_all) + " | " + fmt(e.f1_minor) + " | " + fmt(e.f1_major) + " |\n";
    }
    return out;
  }
  throw Error("unknown report format: " + std::string(format));
}

void emit_report(const ProtocolReport& r, std::string_view format, const fs::path& path) {
  const std::string text = render_report(r, format);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

ProtocolReport run_protocol(const ProtocolConfig& cfg, std::ostream* log) {
  cfg.validate();
  const fs::path root = resolve_output_path(cfg.base.output_dir);
  ProtocolReport report;
  report.seed = cfg.base.seed;

  std::vector<std::string_view> selected;
  for (auto name : kProtocolConfigs) {
    bool keep = cfg.configs.empty();
    for (const auto& c : cfg.configs) keep = keep || parse_protocol_config(c) == name;
    if (keep) selected.push_back(name);
  }

  auto inventory_of = [](const fs::path& manifest) {
    const auto m = load_manifest(manifest, false);
    std::vector<std::string> labels;
    for (std::size_t i : training_indices(m)) labels.push_back(m.records[i].label);
    return build_inventory(labels, manifest.stem().string());
  };
  const GraphemeInventory inv_a = inventory_of(cfg.manifest_a);
  const GraphemeInventory inv_b = inventory_of(cfg.manifest_b);
  const GraphemeInventory super_inv = merge_inventories(inv_a, inv_b);

  std::map<std::string, fs::path> teachers;  // cache key -> checkpoint
  auto glyph_teacher = [&](const TeacherConfig& arch_cfg, const GraphemeInventory& inv, const std::string& key,
                           const fs::path& dir) {
    auto it = teachers.find(key);
    if (it != teachers.end()) return it->second;
    RunConfig t = cfg.base;
    t.teacher = arch_cfg;
    t.teacher_graphemes.clear();
    for (const auto& g : inv.graphemes()) t.teacher_graphemes.push_back(g.text());
    t.output_dir = dir;
    if (log) *log << "[protocol] training teacher " << key << std::endl;
    const auto res = train_teacher(t, log);
    teachers[key] = res.checkpoint;
    return res.checkpoint;
  };

  auto save = [&] { emit_report(report, "json", root / "protocol.json"); };
  try {
    const std::array<std::array<std::string, 2>, 2> names{{{cfg.name_a, cfg.name_b}, {cfg.name_b, cfg.name_a}}};
    const std::array<std::array<fs::path, 2>, 2> manifests{{{cfg.manifest_a, cfg.manifest_b}, {cfg.manifest_b, cfg.manifest_a}}};
    for (std::size_t d = 0; d < 2; ++d) {
      const std::string& train_name = names[d][0];
      const std::string& test_name = names[d][1];
      const fs::path dir = root / (train_name + "_to_" + test_name);
      const GraphemeInventory& inv = d == 0 ? inv_a : inv_b;
      fs::path no_kd_ckpt;

      auto student_run = [&](std::string_view config) -> fs::path {
        RunConfig r = cfg.base;
        r.train_manifest = manifests[d][0];
        r.test_manifest = manifests[d][1];
        r.output_dir = dir / protocol_config_slug(config);
        KdMode mode = KdMode::none;
        if (config == kProtocolConfigs[1]) {
          mode = KdMode::conventional;
          r.conventional_teacher = no_kd_ckpt;
        } else if (config != kProtocolConfigs[0]) {
          const bool super = config.starts_with("Super");
          const bool resnet = config.find("resnet18") != std::string_view::npos;
          const TeacherConfig& tc = resnet ? cfg.resnet_teacher : cfg.conv2_teacher;
          const std::string arch = resnet ? "resnet18" : "conv2";
          mode = super ? KdMode::super : KdMode::lila;
          r.teacher_checkpoint =
              super ? glyph_teacher(tc, super_inv, "super_" + arch, root / ("teacher_super_" + arch))
                    : glyph_teacher(tc, inv, train_name + "_" + arch, dir / ("teacher_" + arch));
        }
        r.distill.kd_mode = mode;
        if (log) *log << "[protocol] " << train_name << " -> " << test_name << ": " << config << std::endl;
        return train_student(r, mode, log).checkpoint;
      };

      const bool need_no_kd = std::find(selected.begin(), selected.end(), kProtocolConfigs[0]) != selected.end() ||
                              std::find(selected.begin(), selected.end(), kProtocolConfigs[1]) != selected.end();
      if (need_no_kd) no_kd_ckpt = student_run(kProtocolConfigs[0]);

      for (auto config : selected) {
        const fs::path ckpt = config == kProtocolConfigs[0] ? no_kd_ckpt : student_run(config);
        const EvalOutcome ev = evaluate_student(ckpt, manifests[d][1]);
        write_json_file(ckpt.parent_path() / "eval.json", ev.to_json());
        report.rows.push_back({train_name, test_name, std::string(config), ev.report, ev.unknown_occurrences});
        save();
      }
    }
  } catch (const std::exception& e) {
    report.complete = false;
    report.error = e.what();
    save();
    throw;
  }
  report.complete = true;
  save();
  return report;
}

}  // namespace stackkd
