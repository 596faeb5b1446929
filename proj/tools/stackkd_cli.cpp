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

// Command-line front end: data generation, training, evaluation and the
// inter-dataset protocol.

#include "stackkd/harness/config.hpp"
#include "stackkd/harness/protocol.hpp"
#include "stackkd/harness/toy.hpp"
#include "stackkd/harness/train.hpp"
#include "stackkd/synthgen.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace stackkd;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> train;
  std::optional<std::string> test;
  std::optional<std::string> teacher_data;
  std::optional<std::string> teacher_graphemes;
  std::optional<int> per_class;
  std::optional<double> val_fraction;
};

struct OptimFlags {
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::optional<double> clip;
  std::optional<std::string> name;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON run configuration; flags override it");
  app->add_option("--seed", f.seed, "run seed");
  app->add_option("--out", f.out, "output directory (relative paths honor STACKKD_OUTPUT_ROOT)");
  app->add_option("--train", f.train, "training manifest (JSON lines)");
  app->add_option("--test", f.test, "test manifest (JSON lines)");
  app->add_option("--teacher-data", f.teacher_data, "glyph dataset directory");
  app->add_option("--teacher-graphemes", f.teacher_graphemes, "comma-separated teacher classes");
  app->add_option("--per-class", f.per_class, "rendered glyphs per teacher class");
  app->add_option("--val-fraction", f.val_fraction, "held-out fraction");
}

void add_optim(CLI::App* app, OptimFlags& f) {
  app->add_option("--epochs", f.epochs);
  app->add_option("--lr", f.lr);
  app->add_option("--batch-size", f.batch_size);
  app->add_option("--clip", f.clip, "gradient norm clip (0 disables)");
  app->add_option("--optimizer", f.name)->check(CLI::IsMember({"adam", "sgd"}));
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? default_run_config() : load_run_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.train) c.train_manifest = *f.train;
  if (f.test) c.test_manifest = *f.test;
  if (f.teacher_data) c.teacher_data = *f.teacher_data;
  if (f.teacher_graphemes) c.teacher_graphemes = split_csv(*f.teacher_graphemes);
  if (f.per_class) c.render.per_class_count = *f.per_class;
  if (f.val_fraction) c.val_fraction = *f.val_fraction;
  return c;
}

void apply_optim(const OptimFlags& f, OptimConfig& o) {
  if (f.epochs) o.epochs = *f.epochs;
  if (f.lr) o.lr = *f.lr;
  if (f.batch_size) o.batch_size = *f.batch_size;
  if (f.clip) o.clip_norm = *f.clip;
  if (f.name) o.name = *f.name;
}

nlohmann::ordered_json load_json_config(const std::string& path) {
  if (path.empty()) return nlohmann::ordered_json::object();
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  try {
    return nlohmann::ordered_json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse config " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stackkd: stacked teacher distillation for grapheme sequence recognition"};
  app.require_subcommand(1);

  // gen-teacher-data
  CommonFlags gtd;
  auto* cmd_gtd = app.add_subcommand("gen-teacher-data", "render the isolated glyph dataset");
  add_common(cmd_gtd, gtd);

  // gen-toy-corpus
  ToyCorpusSpec toy;
  std::string toy_out;
  int toy_classes = 12;
  std::string toy_weights;
  auto* cmd_toy = app.add_subcommand("gen-toy-corpus", "render a synthetic handwriting-style word corpus");
  cmd_toy->add_option("--out", toy_out, "output directory")->required();
  cmd_toy->add_option("--classes", toy_classes, "number of toy letters")->check(CLI::Range(1, 32));
  cmd_toy->add_option("--weights", toy_weights, "comma-separated sampling weights");
  cmd_toy->add_option("--words", toy.num_words);
  cmd_toy->add_option("--min-length", toy.min_length);
  cmd_toy->add_option("--max-length", toy.max_length);
  cmd_toy->add_option("--seed", toy.seed, "word content seed");
  cmd_toy->add_option("--writer-seed", toy.writer_seed, "handwriting style seed");
  cmd_toy->add_option("--writers", toy.num_writers);
  cmd_toy->add_option("--split", toy.split)->check(CLI::IsMember({"", "train", "val", "test"}));
  cmd_toy->add_flag("!--compact", toy.fill_line, "keep glyph aspect and pad the line instead of filling it");

  // train-teacher
  CommonFlags tt;
  OptimFlags tto;
  std::optional<std::string> tt_arch;
  std::optional<int> tt_width;
  auto* cmd_tt = app.add_subcommand("train-teacher", "train the isolated-glyph teacher classifier");
  add_common(cmd_tt, tt);
  add_optim(cmd_tt, tto);
  cmd_tt->add_option("--arch", tt_arch)->check(CLI::IsMember({"conv2", "resnet18"}));
  cmd_tt->add_option("--width", tt_width, "channel width (0 = architecture default)");

  // train-student
  CommonFlags ts;
  OptimFlags tso;
  std::string kd_mode = "none";
  std::optional<std::string> ts_teacher, ts_conv_teacher, ts_weight_mode;
  std::optional<double> ts_alpha, ts_tau;
  std::optional<int> ts_retry, ts_hidden;
  std::optional<std::string> ts_channels;
  auto* cmd_ts = app.add_subcommand("train-student", "train the sequence recognizer");
  add_common(cmd_ts, ts);
  add_optim(cmd_ts, tso);
  cmd_ts->add_option("--kd-mode", kd_mode)->check(CLI::IsMember({"none", "conventional", "lila", "super"}));
  cmd_ts->add_option("--teacher", ts_teacher, "glyph teacher checkpoint (lila, super)");
  cmd_ts->add_option("--conventional-teacher", ts_conv_teacher, "sequence teacher checkpoint (conventional)");
  cmd_ts->add_option("--alpha", ts_alpha);
  cmd_ts->add_option("--tau", ts_tau);
  cmd_ts->add_option("--kd-weight-mode", ts_weight_mode)->check(CLI::IsMember({"paper", "hinton"}));
  cmd_ts->add_option("--retry-cap", ts_retry);
  cmd_ts->add_option("--channels", ts_channels, "five comma-separated conv widths");
  cmd_ts->add_option("--hidden", ts_hidden, "recurrent hidden size");

  // evaluate
  std::string ev_ckpt, ev_manifest;
  std::optional<std::string> ev_out;
  auto* cmd_ev = app.add_subcommand("evaluate", "evaluate a student checkpoint on a manifest");
  cmd_ev->add_option("--checkpoint", ev_ckpt)->required();
  cmd_ev->add_option("--manifest", ev_manifest)->required();
  cmd_ev->add_option("--out", ev_out, "directory for eval.json and summary.tsv");

  // run-protocol
  std::string rp_config;
  std::vector<std::string> rp_a, rp_b;
  std::optional<std::string> rp_out, rp_configs;
  std::optional<std::uint64_t> rp_seed;
  std::string rp_format = "markdown";
  auto* cmd_rp = app.add_subcommand("run-protocol", "train/test in both directions across six configurations");
  cmd_rp->add_option("--config", rp_config, "JSON configuration (run keys plus a protocol section)");
  cmd_rp->add_option("--dataset-a", rp_a, "NAME MANIFEST")->expected(2);
  cmd_rp->add_option("--dataset-b", rp_b, "NAME MANIFEST")->expected(2);
  cmd_rp->add_option("--configs", rp_configs, "comma-separated subset of configurations");
  cmd_rp->add_option("--out", rp_out);
  cmd_rp->add_option("--seed", rp_seed);
  cmd_rp->add_option("--format", rp_format)->check(CLI::IsMember({"json", "tsv", "markdown"}));

  // report
  std::string rep_in, rep_format = "markdown";
  std::optional<std::string> rep_out;
  auto* cmd_rep = app.add_subcommand("report", "render a protocol table");
  cmd_rep->add_option("--input", rep_in, "protocol.json")->required();
  cmd_rep->add_option("--format", rep_format);
  cmd_rep->add_option("--out", rep_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_gtd->parsed()) {
      RunConfig c = build_config(gtd);
      c.teacher_data.clear();
      const GraphemeInventory inv = teacher_inventory_for(c);
      const fs::path dir = resolve_output_path(c.output_dir);
      const auto samples = generate_teacher_dataset(inv, c.render);
      write_glyph_dataset(dir, samples);
      inv.save_tsv(dir / "inventory.tsv");
      std::cout << samples.size() << " glyphs over " << inv.size() << " classes -> " << dir.string()
                << " (checksum " << hex64(dataset_checksum(samples)) << ")\n";
    } else if (cmd_toy->parsed()) {
      toy.graphemes = toy_script_graphemes(static_cast<std::size_t>(toy_classes));
      for (const auto& w : split_csv(toy_weights)) toy.weights.push_back(std::stod(w));
      const auto recs = generate_toy_corpus(resolve_output_path(toy_out), toy);
      std::cout << recs.size() << " words -> " << (resolve_output_path(toy_out) / "manifest.jsonl").string() << "\n";
    } else if (cmd_tt->parsed()) {
      RunConfig c = build_config(tt);
      apply_optim(tto, c.teacher_optim);
      if (tt_arch) c.teacher.arch = parse_teacher_arch(*tt_arch);
      if (tt_width) c.teacher.width = *tt_width;
      c.validate();
      const auto res = train_teacher(c, &std::cerr);
      std::cout << "teacher checkpoint " << res.checkpoint.string() << " held-out accuracy "
                << res.heldout_accuracy << "%\n";
    } else if (cmd_ts->parsed()) {
      RunConfig c = build_config(ts);
      apply_optim(tso, c.student_optim);
      c.distill.kd_mode = parse_kd_mode(kd_mode);
      if (ts_teacher) c.teacher_checkpoint = *ts_teacher;
      if (ts_conv_teacher) c.conventional_teacher = *ts_conv_teacher;
      if (ts_alpha) c.distill.alpha = *ts_alpha;
      if (ts_tau) c.distill.tau = *ts_tau;
      if (ts_weight_mode) c.distill.kd_weight_mode = parse_kd_weight_mode(*ts_weight_mode);
      if (ts_retry) c.distill.retry_cap = *ts_retry;
      if (ts_hidden) c.student.recurrent_hidden = *ts_hidden;
      if (ts_channels) {
        const auto parts = split_csv(*ts_channels);
        if (parts.size() != 5) throw CLI::ValidationError("--channels", "expected five values");
        for (std::size_t i = 0; i < 5; ++i) c.student.channels[i] = std::stoi(parts[i]);
      }
      c.validate();
      const auto res = train_student(c, c.distill.kd_mode, &std::cerr);
      std::cout << "student checkpoint " << res.checkpoint.string() << " (" << res.num_train << " trained, "
                << res.num_val << " validation, " << res.num_skipped << " skipped)\n";
      if (!c.test_manifest.empty()) {
        const auto ev = evaluate_student(res.checkpoint, c.test_manifest);
        write_json_file(res.checkpoint.parent_path() / "eval.json", ev.to_json());
        std::cout << summary_tsv_header() << "\n" << summary_tsv_row(to_string(c.distill.kd_mode), ev.report) << "\n";
      }
    } else if (cmd_ev->parsed()) {
      const auto ev = evaluate_student(ev_ckpt, ev_manifest);
      const std::string row = summary_tsv_row(fs::path(ev_ckpt).parent_path().filename().string(), ev.report);
      if (ev_out) {
        const fs::path dir = resolve_output_path(*ev_out);
        write_json_file(dir / "eval.json", ev.to_json());
        std::ofstream(dir / "summary.tsv", std::ios::binary) << summary_tsv_header() << "\n" << row << "\n";
      }
      std::cout << summary_tsv_header() << "\n" << row << "\n";
      if (ev.unknown_occurrences)
        std::cerr << ev.unknown_occurrences << " label graphemes are outside the student inventory\n";
    } else if (cmd_rp->parsed()) {
      ProtocolConfig pc = protocol_config_from_json(load_json_config(rp_config));
      if (rp_a.size() == 2) pc.name_a = rp_a[0], pc.manifest_a = rp_a[1];
      if (rp_b.size() == 2) pc.name_b = rp_b[0], pc.manifest_b = rp_b[1];
      if (rp_configs) pc.configs = split_csv(*rp_configs);
      if (rp_out) pc.base.output_dir = *rp_out;
      if (rp_seed) pc.base.seed = *rp_seed;
      const auto report = run_protocol(pc, &std::cerr);
      const fs::path root = resolve_output_path(pc.base.output_dir);
      emit_report(report, "tsv", root / "protocol.tsv");
      emit_report(report, "markdown", root / "protocol.md");
      std::cout << render_report(report, rp_format);
    } else if (cmd_rep->parsed()) {
      const auto report = protocol_from_json(read_json_file(rep_in));
      if (rep_out)
        emit_report(report, rep_format, *rep_out);
      else
        std::cout << render_report(report, rep_format);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
