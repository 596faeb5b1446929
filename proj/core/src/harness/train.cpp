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

#include "stackkd/harness/train.hpp"

#include "stackkd/ctc.hpp"
#include "stackkd/nn/optim.hpp"
#include "stackkd/prob.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <set>

namespace stackkd {

namespace fs = std::filesystem;

namespace {

// Stream identifiers mixed into the run seed.
constexpr std::uint64_t kTeacherInit = 0x7465616368ULL;
constexpr std::uint64_t kTeacherSplit = 0x74737074ULL;
constexpr std::uint64_t kTeacherData = 0x74646174ULL;
constexpr std::uint64_t kStudentInit = 0x73747564ULL;
constexpr std::uint64_t kStudentSplit = 0x73737074ULL;
constexpr std::uint64_t kStudentData = 0x73646174ULL;
constexpr std::uint64_t kTeacherDraw = 0x64726177ULL;

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

std::vector<std::size_t> shuffled(std::vector<std::size_t> v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
  return v;
}

// Row-major [T, N, K] -> the T x K slice of sample n.
Matrix sequence_of(const nn::Tensor& out, int n) {
  const int T = out.dim(0), N = out.dim(1), K = out.dim(2);
  Matrix m(T, K);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < K; ++k) m(t, k) = out[(static_cast<std::size_t>(t) * N + n) * K + k];
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

nlohmann::ordered_json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse " + path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json epochs_to_json(const std::vector<EpochLog>& epochs) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& e : epochs)
    a.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_metric", e.val_metric}});
  return a;
}

std::vector<std::size_t> training_indices(const WordDatasetManifest& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.records.size(); ++i)
    if (m.records[i].split != "test") out.push_back(i);
  return out;
}

GraphemeInventory teacher_inventory_for(const RunConfig& cfg) {
  if (!cfg.teacher_graphemes.empty()) {
    std::vector<InventoryEntry> entries;
    for (const auto& s : cfg.teacher_graphemes) {
      auto gs = extract_graphemes(normalize_text(s));
      if (gs.size() != 1) throw Error("teacher grapheme '" + s + "' is not a single grapheme");
      entries.push_back({gs.front(), entries.size(), static_cast<std::uint64_t>(cfg.render.per_class_count)});
    }
    return GraphemeInventory::from_entries(std::move(entries), "teacher");
  }
  if (!cfg.train_manifest.empty()) {
    const auto m = load_manifest(cfg.train_manifest, false);
    std::vector<std::string> labels;
    for (std::size_t i : training_indices(m)) labels.push_back(m.records[i].label);
    return build_inventory(labels, cfg.train_manifest.stem().string());
  }
  if (!cfg.teacher_data.empty()) {
    std::map<Grapheme, std::uint64_t> counts;
    for (const auto& s : read_glyph_dataset(cfg.teacher_data)) ++counts[s.label];
    return GraphemeInventory::from_counts(counts, "teacher");
  }
  throw Error("cannot determine teacher classes: set teacher_graphemes, a training manifest or teacher data");
}

std::vector<GlyphSample> teacher_glyphs_for(const RunConfig& cfg, const GraphemeInventory& inv) {
  if (cfg.teacher_data.empty()) return generate_teacher_dataset(inv, cfg.render);
  std::vector<GlyphSample> all = read_glyph_dataset(cfg.teacher_data);
  std::vector<GlyphSample> out;
  std::set<Grapheme> seen;
  for (auto& s : all)
    if (inv.contains(s.label)) {
      seen.insert(s.label);
      out.push_back(std::move(s));
    }
  for (const auto& e : inv.entries())
    if (!seen.contains(e.grapheme)) throw Error("teacher data has no sample of '" + e.grapheme.text() + "'");
  return out;
}

// --- teacher -----------------------------------------------------------------

namespace {

struct ClassifierPass {
  double loss = 0.0;
  std::size_t correct = 0;
};

ClassifierPass teacher_eval(const TeacherModel& model, const std::vector<GlyphSample>& data,
                            const std::vector<int>& labels, const std::vector<std::size_t>& idx, int batch) {
  ClassifierPass r;
  nn::NoGradGuard guard;
  for (std::size_t b0 = 0; b0 < idx.size(); b0 += static_cast<std::size_t>(batch)) {
    const std::size_t b1 = std::min(idx.size(), b0 + static_cast<std::size_t>(batch));
    std::vector<const GrayImage*> imgs;
    for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&data[idx[i]].image);
    const nn::Var out = model.forward(nn::Var(images_to_tensor(imgs)));
    const int K = out.value().dim(1);
    for (std::size_t i = b0; i < b1; ++i) {
      std::span<const double> row(out.value().data() + (i - b0) * K, static_cast<std::size_t>(K));
      const auto lp = log_softmax(row);
      r.loss -= lp[static_cast<std::size_t>(labels[idx[i]])];
      if (argmax(row) == static_cast<std::size_t>(labels[idx[i]])) ++r.correct;
    }
  }
  return r;
}

}  // namespace

TeacherTrainResult train_teacher_on(const RunConfig& cfg, const GraphemeInventory& inv,
                                    const std::vector<GlyphSample>& data, const fs::path& checkpoint,
                                    std::ostream* log) {
  cfg.validate();
  if (inv.empty()) throw Error("teacher inventory is empty");
  if (data.empty()) throw Error("teacher data is empty");
  TeacherConfig tcfg = cfg.teacher;
  tcfg.num_classes = static_cast<int>(inv.size());
  tcfg.input_size = data.front().image.height();
  TeacherModel model(tcfg, mix_seed(cfg.seed, kTeacherInit));

  std::vector<int> labels;
  for (const auto& s : data) {
    if (s.image.height() != tcfg.input_size || s.image.width() != tcfg.input_size)
      throw Error("teacher images must share one square size");
    auto k = inv.index_of(s.label);
    if (!k) throw Error("teacher sample label '" + s.label.text() + "' is not a teacher class");
    labels.push_back(static_cast<int>(*k));
  }
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Partition part = partition_records(all, cfg.val_fraction, mix_seed(cfg.seed, kTeacherSplit));

  auto params = model.parameters().vars();
  auto opt = make_optimizer(cfg.teacher_optim, params);
  const int B = cfg.teacher_optim.batch_size;
  TeacherTrainResult res;
  res.inventory = inv;
  say(log, "teacher " + to_string(tcfg.arch) + ": " + std::to_string(inv.size()) + " classes, " +
               std::to_string(part.train.size()) + " train / " + std::to_string(part.val.size()) +
               " held-out glyphs, " + std::to_string(model.parameter_count()) + " parameters");

  for (int epoch = 0; epoch < cfg.teacher_optim.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = shuffled(part.train, mix_seed(cfg.seed, kTeacherData, static_cast<std::uint64_t>(epoch)));
    double total = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(B)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(B));
      const int n = static_cast<int>(b1 - b0);
      std::vector<const GrayImage*> imgs;
      for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&data[order[i]].image);
      nn::Var out = model.forward_train(nn::Var(images_to_tensor(imgs)));
      const int K = out.value().dim(1);
      nn::Tensor seed(out.shape());
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        std::span<const double> row(out.value().data() + static_cast<std::size_t>(i) * K, static_cast<std::size_t>(K));
        const auto lp = log_softmax(row);
        const int y = labels[order[b0 + static_cast<std::size_t>(i)]];
        loss -= lp[static_cast<std::size_t>(y)];
        for (int k = 0; k < K; ++k)
          seed[static_cast<std::size_t>(i) * K + k] = (std::exp(lp[static_cast<std::size_t>(k)]) - (k == y ? 1.0 : 0.0)) / n;
      }
      loss /= n;
      if (!std::isfinite(loss))
        throw Error("teacher training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch " + std::to_string(b0 / static_cast<std::size_t>(B) + 1));
      nn::backward(out, seed);
      if (cfg.teacher_optim.clip_norm > 0) nn::clip_grad_norm(params, cfg.teacher_optim.clip_norm);
      opt->step();
      opt->zero_grad();
      total += loss * n;
    }
    EpochLog e;
    e.epoch = epoch + 1;
    e.train_loss = order.empty() ? 0.0 : total / static_cast<double>(order.size());
    if (!part.val.empty()) {
      const auto v = teacher_eval(model, data, labels, part.val, 64);
      e.val_loss = v.loss / static_cast<double>(part.val.size());
      e.val_metric = 100.0 * static_cast<double>(v.correct) / static_cast<double>(part.val.size());
    }
    res.epochs.push_back(e);
    say(log, "  epoch " + std::to_string(e.epoch) + " loss " + fixed(e.train_loss) + " held-out acc " +
                 fixed(e.val_metric, 2) + "% (" + fixed(seconds_since(t0), 1) + "s)");
  }
  res.heldout_accuracy = res.epochs.empty() ? 0.0 : res.epochs.back().val_metric;

  nlohmann::ordered_json extra;
  extra["seed"] = cfg.seed;
  extra["render"] = run_config_to_json(cfg)["render"];
  extra["heldout_accuracy"] = res.heldout_accuracy;
  extra["epochs"] = epochs_to_json(res.epochs);
  save_teacher(checkpoint, model, inv, extra);
  res.checkpoint = checkpoint;
  return res;
}

TeacherTrainResult train_teacher(const RunConfig& cfg, std::ostream* log) {
  const GraphemeInventory inv = teacher_inventory_for(cfg);
  const auto data = teacher_glyphs_for(cfg, inv);
  const fs::path dir = resolve_output_path(cfg.output_dir);
  auto res = train_teacher_on(cfg, inv, data, dir / "teacher.ckpt", log);
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["kind"] = "teacher";
  j["arch"] = to_string(cfg.teacher.arch);
  j["num_classes"] = inv.size();
  j["heldout_accuracy"] = res.heldout_accuracy;
  j["epochs"] = epochs_to_json(res.epochs);
  j["config"] = run_config_to_json(cfg);
  write_json_file(dir / "teacher_train_log.json", j);
  return res;
}

// --- student -----------------------------------------------------------------

namespace {

// Per-grapheme teacher distributions for stacked distillation.
class StackSource {
 public:
  StackSource(const RunConfig& cfg, const GraphemeInventory& student_inv, std::ostream* log)
      : teacher_(load_teacher(cfg.teacher_checkpoint)), tau_(cfg.distill.tau), retry_cap_(cfg.distill.retry_cap) {
    mapping_ = build_class_mapping(student_inv, teacher_.inventory);
    RunConfig pool_cfg = cfg;
    const auto& extra = teacher_.meta.value("extra", nlohmann::ordered_json::object());
    if (cfg.teacher_data.empty() && extra.contains("render"))
      pool_cfg = run_config_from_json({{"render", extra.at("render")}}, cfg);
    pool_ = GlyphPool(teacher_glyphs_for(pool_cfg, teacher_.inventory));
    cache_.resize(pool_.size());
    say(log, "glyph teacher " + cfg.teacher_checkpoint.string() + ": " + std::to_string(teacher_.inventory.size()) +
                 " classes, pool of " + std::to_string(pool_.size()) + " glyphs");
  }

  TeacherStack stack(const GraphemeSequence& word, int n_seq, std::uint64_t seed, std::uint64_t epoch,
                     std::uint64_t word_index, std::size_t& calls, std::size_t& fallbacks) {
    TeacherFn fn = [this](std::size_t i, const GlyphSample& s) -> std::vector<double> {
      if (!cache_[i]) cache_[i] = teacher_forward(teacher_.model, s.image);
      return *cache_[i];
    };
    std::vector<std::vector<double>> per;
    for (std::size_t p = 0; p < word.size(); ++p) {
      const auto t_class = teacher_.inventory.index_of(word[p]);
      const auto sel = select_verified_teacher_sample(word[p], *t_class, fn, pool_, retry_cap_, tau_,
                                                      mix_seed(seed, kTeacherDraw, epoch, word_index, p), nullptr);
      calls += static_cast<std::size_t>(sel.teacher_calls);
      if (!sel.verified) ++fallbacks;
      per.push_back(project_super_teacher(sel.logits, mapping_, tau_));
    }
    return stack_teacher_outputs(per, n_seq);
  }

 private:
  LoadedTeacher teacher_;
  double tau_;
  int retry_cap_;
  std::vector<std::size_t> mapping_;
  GlyphPool pool_;
  std::vector<std::optional<std::vector<double>>> cache_;
};

}  // namespace

StudentTrainResult train_student(const RunConfig& cfg, KdMode mode, std::ostream* log) {
  cfg.validate();
  if (cfg.train_manifest.empty()) throw Error("train_student needs a training manifest");
  const WordDatasetManifest m = load_manifest(cfg.train_manifest);
  const auto candidates = training_indices(m);
  if (candidates.empty()) throw Error("training manifest has no training records");

  std::vector<std::string> labels;
  for (std::size_t i : candidates) labels.push_back(m.records[i].label);
  StudentTrainResult res;
  res.inventory = build_inventory(labels, cfg.train_manifest.stem().string());

  StudentConfig scfg = cfg.student;
  scfg.num_classes = static_cast<int>(res.inventory.size()) + 1;
  scfg.validate();
  const int blank = scfg.blank();

  // Encode labels and drop words the output sequence cannot emit.
  std::vector<std::vector<int>> targets(m.records.size());
  std::vector<std::size_t> usable;
  for (std::size_t i : candidates) {
    targets[i] = res.inventory.encode(m.records[i].graphemes);
    if (static_cast<int>(targets[i].size()) > scfg.n_seq || ctc_min_frames(targets[i]) > scfg.n_seq) {
      ++res.num_skipped;
      continue;
    }
    usable.push_back(i);
  }

  Partition part;
  if (m.has_split_tags()) {
    part.seed = cfg.seed;
    for (std::size_t i : usable) (m.records[i].split == "val" ? part.val : part.train).push_back(i);
  } else {
    part = partition_records(usable, cfg.val_fraction, mix_seed(cfg.seed, kStudentSplit));
  }
  res.num_train = part.train.size();
  res.num_val = part.val.size();
  if (part.train.empty()) throw Error("no trainable words after filtering");

  std::vector<GrayImage> images(m.records.size());
  for (std::size_t i : usable) images[i] = load_word_image(m.records[i], scfg.input_height, scfg.input_width);

  std::optional<StackSource> stacks;
  if (mode == KdMode::lila || mode == KdMode::super) {
    if (cfg.teacher_checkpoint.empty()) throw Error(to_string(mode) + " distillation needs a teacher checkpoint");
    stacks.emplace(cfg, res.inventory, log);
  }
  std::vector<Matrix> seq_teacher(m.records.size());
  if (mode == KdMode::conventional) {
    if (cfg.conventional_teacher.empty()) throw Error("conventional distillation needs a sequence teacher checkpoint");
    LoadedStudent t = load_student(cfg.conventional_teacher);
    if (t.inventory.graphemes() != res.inventory.graphemes() || t.model.config().n_seq != scfg.n_seq)
      throw Error("sequence teacher classes or length differ from the student");
    nn::NoGradGuard guard;
    for (std::size_t b0 = 0; b0 < part.train.size(); b0 += 32) {
      const std::size_t b1 = std::min(part.train.size(), b0 + 32);
      std::vector<const GrayImage*> imgs;
      for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&images[part.train[i]]);
      const nn::Var out = t.model.forward(nn::Var(images_to_tensor(imgs)));
      for (std::size_t i = b0; i < b1; ++i) seq_teacher[part.train[i]] = sequence_of(out.value(), static_cast<int>(i - b0));
    }
  }

  StudentModel model(scfg, mix_seed(cfg.seed, kStudentInit));
  auto params = model.parameters().vars();
  auto opt = make_optimizer(cfg.student_optim, params);
  const int B = cfg.student_optim.batch_size;
  say(log, "student (" + to_string(mode) + "): " + std::to_string(res.inventory.size()) + " classes, " +
               std::to_string(res.num_train) + " train / " + std::to_string(res.num_val) + " val words, " +
               std::to_string(res.num_skipped) + " skipped, " + std::to_string(model.parameter_count()) +
               " parameters");

  for (int epoch = 0; epoch < cfg.student_optim.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = shuffled(part.train, mix_seed(cfg.seed, kStudentData, static_cast<std::uint64_t>(epoch)));
    double total = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(B)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(B));
      const int n = static_cast<int>(b1 - b0);
      std::vector<const GrayImage*> imgs;
      for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&images[order[i]]);
      nn::Var out = model.forward_train(nn::Var(images_to_tensor(imgs)));
      const int T = out.value().dim(0), N = out.value().dim(1), K = out.value().dim(2);
      nn::Tensor seed(out.shape());
      double loss = 0.0;
      for (int s = 0; s < n; ++s) {
        const std::size_t rec = order[b0 + static_cast<std::size_t>(s)];
        const Matrix z = sequence_of(out.value(), s);
        KdLoss l;
        switch (mode) {
          case KdMode::none: {
            CtcResult c = ctc_loss_from_logits(z, targets[rec], blank);
            l.total = c.loss;
            l.grad = std::move(c.grad);
            break;
          }
          case KdMode::conventional:
            l = conventional_kd_loss(z, seq_teacher[rec], targets[rec], cfg.distill);
            break;
          case KdMode::lila:
          case KdMode::super:
            l = lila_boti_loss(z,
                               targets[rec],
                               stacks->stack(m.records[rec].graphemes, scfg.n_seq, cfg.seed,
                                             static_cast<std::uint64_t>(epoch), rec, res.teacher_calls,
                                             res.teacher_fallbacks),
                               cfg.distill);
            break;
        }
        loss += l.total;
        for (int t = 0; t < T; ++t)
          for (int k = 0; k < K; ++k) seed[(static_cast<std::size_t>(t) * N + s) * K + k] = l.grad(t, k) / n;
      }
      loss /= n;
      if (!std::isfinite(loss))
        throw Error("student training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch " + std::to_string(b0 / static_cast<std::size_t>(B) + 1));
      nn::backward(out, seed);
      if (cfg.student_optim.clip_norm > 0) nn::clip_grad_norm(params, cfg.student_optim.clip_norm);
      opt->step();
      opt->zero_grad();
      res.batch_losses.push_back(loss);
      total += loss * n;
    }

    EpochLog e;
    e.epoch = epoch + 1;
    e.train_loss = total / static_cast<double>(order.size());
    if (!part.val.empty()) {
      nn::NoGradGuard guard;
      std::size_t exact = 0;
      double vloss = 0.0;
      for (std::size_t b0 = 0; b0 < part.val.size(); b0 += 32) {
        const std::size_t b1 = std::min(part.val.size(), b0 + 32);
        std::vector<const GrayImage*> imgs;
        for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&images[part.val[i]]);
        const nn::Var out = model.forward(nn::Var(images_to_tensor(imgs)));
        for (std::size_t i = b0; i < b1; ++i) {
          const Matrix z = sequence_of(out.value(), static_cast<int>(i - b0));
          vloss += ctc_loss_from_logits(z, targets[part.val[i]], blank).loss;
          if (ctc_greedy_decode(z, blank) == targets[part.val[i]]) ++exact;
        }
      }
      e.val_loss = vloss / static_cast<double>(part.val.size());
      e.val_metric = 100.0 * static_cast<double>(exact) / static_cast<double>(part.val.size());
    }
    res.epochs.push_back(e);
    say(log, "  epoch " + std::to_string(e.epoch) + " loss " + fixed(e.train_loss) + " val loss " +
                 fixed(e.val_loss) + " val WRR " + fixed(e.val_metric, 2) + "% (" + fixed(seconds_since(t0), 1) + "s)");
  }

  const fs::path dir = resolve_output_path(cfg.output_dir);
  nlohmann::ordered_json extra;
  extra["seed"] = cfg.seed;
  extra["kd_mode"] = to_string(mode);
  extra["distill"] = cfg.distill;
  extra["train_manifest_checksum"] = hex64(m.checksum);
  save_student(dir / "student.ckpt", model, res.inventory, extra);
  res.checkpoint = dir / "student.ckpt";

  auto pj = partition_to_json(part);
  pj["manifest_checksum"] = hex64(m.checksum);
  write_json_file(dir / "partition.json", pj);
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["kind"] = "student";
  j["kd_mode"] = to_string(mode);
  j["num_train"] = res.num_train;
  j["num_val"] = res.num_val;
  j["num_skipped"] = res.num_skipped;
  j["teacher_calls"] = res.teacher_calls;
  j["teacher_fallbacks"] = res.teacher_fallbacks;
  j["epochs"] = epochs_to_json(res.epochs);
  j["config"] = run_config_to_json(cfg);
  write_json_file(dir / "train_log.json", j);
  return res;
}

// --- evaluation --------------------------------------------------------------

std::vector<GraphemeSequence> decode_words(const LoadedStudent& student, const std::vector<GrayImage>& images,
                                           int batch_size) {
  std::vector<GraphemeSequence> out;
  out.reserve(images.size());
  const int blank = student.model.config().blank();
  nn::NoGradGuard guard;
  for (std::size_t b0 = 0; b0 < images.size(); b0 += static_cast<std::size_t>(batch_size)) {
    const std::size_t b1 = std::min(images.size(), b0 + static_cast<std::size_t>(batch_size));
    std::vector<const GrayImage*> imgs;
    for (std::size_t i = b0; i < b1; ++i) imgs.push_back(&images[i]);
    const nn::Var o = student.model.forward(nn::Var(images_to_tensor(imgs)));
    for (std::size_t i = b0; i < b1; ++i)
      out.push_back(student.inventory.decode(ctc_greedy_decode(sequence_of(o.value(), static_cast<int>(i - b0)), blank)));
  }
  return out;
}

EvalOutcome evaluate_student(const LoadedStudent& student, const WordDatasetManifest& manifest) {
  std::vector<std::size_t> idx;
  const bool tagged = manifest.has_split_tags();
  for (std::size_t i = 0; i < manifest.records.size(); ++i)
    if (!tagged || manifest.records[i].split == "test") idx.push_back(i);
  if (idx.empty()) throw Error("no evaluation records in manifest");

  const auto& c = student.model.config();
  std::vector<GrayImage> images;
  for (std::size_t i : idx) images.push_back(load_word_image(manifest.records[i], c.input_height, c.input_width));
  const auto preds = decode_words(student, images);

  EvalOutcome out;
  std::set<std::string> unknown;
  std::vector<PredictionPair> pairs;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& label = manifest.records[idx[k]].graphemes;
    for (const auto& g : label)
      if (!student.inventory.contains(g)) {
        ++out.unknown_occurrences;
        unknown.insert(g.text());
      }
    pairs.push_back({preds[k], label});
  }
  out.unknown_graphemes.assign(unknown.begin(), unknown.end());
  out.report = evaluate_pairs(pairs, split_minor_major(student.inventory));
  const auto extra = student.meta.value("extra", nlohmann::ordered_json::object());
  out.seed = extra.value("seed", std::uint64_t{0});
  out.manifest_checksum = manifest.checksum;
  return out;
}

EvalOutcome evaluate_student(const fs::path& checkpoint, const fs::path& manifest) {
  const LoadedStudent s = load_student(checkpoint);
  return evaluate_student(s, load_manifest(manifest));
}

nlohmann::ordered_json EvalOutcome::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["manifest_checksum"] = hex64(manifest_checksum);
  j["unknown_occurrences"] = unknown_occurrences;
  j["unknown_graphemes"] = unknown_graphemes;
  j["report"] = report_to_json(report);
  return j;
}

}  // namespace stackkd
