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

// Acceptance runner: one PASS/FAIL line per criterion. Tolerances are pinned
// below; the toy experiments use fixed seeds so the printed numbers reproduce.

#include "../oracles.hpp"
#include "stackkd/ctc.hpp"
#include "stackkd/distill.hpp"
#include "stackkd/grapheme.hpp"
#include "stackkd/harness/protocol.hpp"
#include "stackkd/harness/toy.hpp"
#include "stackkd/harness/train.hpp"
#include "stackkd/metrics.hpp"
#include "stackkd/prob.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace stackkd;
using testing::brute_force_ctc_probability;
using testing::brute_force_edit_distance;
using testing::numeric_gradient;
using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;

namespace {

constexpr double kCtcOracleTol = 1e-10;
constexpr double kGradRelTol = 1e-4;
constexpr double kSoftmaxTol = 1e-12;
constexpr double kReductionTol = 1e-10;
constexpr double kCtcSuiteSeconds = 60.0;
constexpr double kOverfitSeconds = 300.0;
constexpr int kOverfitEpochBudget = 400;
constexpr double kDirectionalSeconds = 1800.0;
constexpr double kSuperSlack = 1.0;  // F1 points
constexpr double kLatencyTolerance = 0.25;  // |kd / none - 1|

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ctc_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t instances = 0, mismatched_feasibility = 0;
  for (int T = 1; T <= 6; ++T)
    for (int C = 2; C <= 4; ++C)
      for (int draw = 0; draw < 3; ++draw) {
        const Matrix lp = log_softmax_rows(random_matrix(T, C, rng, 1.5));
        // every target of length 1..3 over the C - 1 labels
        std::vector<std::vector<int>> frontier{{}};
        for (int len = 1; len <= 3; ++len) {
          std::vector<std::vector<int>> next;
          for (const auto& t : frontier)
            for (int k = 0; k < C - 1; ++k) {
              auto e = t;
              e.push_back(k);
              next.push_back(e);
            }
          for (const auto& target : next) {
            const double p = brute_force_ctc_probability(lp, target, C - 1);
            const CtcResult r = ctc_loss(lp, target, C - 1);
            ++instances;
            if (p == 0.0) {
              mismatched_feasibility += r.feasible || !std::isinf(r.loss);
              continue;
            }
            if (!r.feasible) {
              ++mismatched_feasibility;
              continue;
            }
            worst = std::max(worst, std::abs(r.loss + std::log(p)));
          }
          frontier = std::move(next);
        }
      }
  const double secs = seconds_since(t0);
  return {worst <= kCtcOracleTol && mismatched_feasibility == 0 && secs < kCtcSuiteSeconds,
          std::to_string(instances) + " instances, max |DP - enumeration| " + fmt(worst) + ", " + fmt(secs, 3) + "s"};
}

struct KdInstance {
  Matrix z, teacher;
  std::vector<int> target;
  TeacherStack stack;
  DistillConfig cfg;
};

KdInstance kd_instance(std::mt19937_64& rng) {
  KdInstance in;
  const int T = 5 + static_cast<int>(rng() % 8), K = 2 + static_cast<int>(rng() % 4);
  const int len = 1 + static_cast<int>(rng() % std::min<std::uint64_t>(4, static_cast<std::uint64_t>(T / 2)));
  for (int i = 0; i < len; ++i) in.target.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(K)));
  std::vector<std::vector<double>> per;
  for (int k : in.target) {
    auto v = random_vector(K, rng);
    v[static_cast<std::size_t>(k)] += 2.0;
    per.push_back(softmax(v));
  }
  in.stack = stack_teacher_outputs(per, T);
  in.z = random_matrix(T, K + 1, rng, 1.5);
  in.teacher = random_matrix(T, K + 1, rng, 2.0);
  in.cfg.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  in.cfg.tau = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
  return in;
}

Outcome gradient_checks() {
  std::mt19937_64 rng(102);
  double worst_ctc = 0, worst_lila = 0, worst_conv = 0;
  int n = 0;
  while (n < 25) {
    KdInstance in = kd_instance(rng);
    const int blank = static_cast<int>(in.z.cols()) - 1;
    if (ctc_min_frames(in.target) > in.z.rows()) continue;
    auto f_ctc = [&](const Matrix& m) { return ctc_loss_from_logits(m, in.target, blank).loss; };
    auto f_lila = [&](const Matrix& m) { return lila_boti_loss(m, in.target, in.stack, in.cfg).total; };
    auto f_conv = [&](const Matrix& m) { return conventional_kd_loss(m, in.teacher, in.target, in.cfg).total; };
    worst_ctc = std::max(worst_ctc, relative_error(ctc_loss_from_logits(in.z, in.target, blank).grad, numeric_gradient(f_ctc, in.z)));
    worst_lila = std::max(worst_lila, relative_error(lila_boti_loss(in.z, in.target, in.stack, in.cfg).grad, numeric_gradient(f_lila, in.z)));
    worst_conv = std::max(worst_conv, relative_error(conventional_kd_loss(in.z, in.teacher, in.target, in.cfg).grad,
                                                     numeric_gradient(f_conv, in.z)));
    ++n;
  }
  const double worst = std::max({worst_ctc, worst_lila, worst_conv});
  return {worst < kGradRelTol, std::to_string(n) + " instances per loss, max relative error ctc " + fmt(worst_ctc) +
                                   ", lila " + fmt(worst_lila) + ", conventional " + fmt(worst_conv)};
}

Outcome stacking_exhaustive() {
  std::mt19937_64 rng(103);
  int cases = 0, bad = 0;
  for (int n_seq : {7, 31})
    for (int n_x = 1; n_x <= n_seq; ++n_x) {
      std::vector<std::vector<double>> per;
      for (int i = 0; i < n_x; ++i) per.push_back(softmax(random_vector(4, rng, 2.0)));
      const TeacherStack s = stack_teacher_outputs(per, n_seq);
      ++cases;
      bool ok = s.n_seq() == n_seq && s.num_classes() == 5;
      int row = 0;
      for (int i = 0; ok && i < n_x; ++i) {
        const int size = n_seq / n_x + (i == n_x - 1 ? n_seq % n_x : 0);
        for (int r = 0; r < size; ++r, ++row)
          for (int c = 0; c < 4; ++c) ok = ok && s.targets()(row, c) == per[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      }
      ok = ok && row == n_seq && s.targets().col(4).cwiseAbs().maxCoeff() == 0.0;
      bad += !ok;
    }
  return {bad == 0, std::to_string(cases) + " (n_seq, n_x) cases, " + std::to_string(bad) + " wrong"};
}

Outcome softening() {
  std::mt19937_64 rng(104);
  double worst = 0;
  int argmax_changes = 0, entropy_drops = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto z = random_vector(2 + trial % 9, rng, 3.0);
    const auto p = softmax(z), q = soften(z, 1.0);
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
    double prev = -1;
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto s = soften(z, tau);
      argmax_changes += argmax(s) != argmax(z);
      const double h = entropy(s);
      entropy_drops += h < prev;
      prev = h;
    }
  }
  return {worst <= kSoftmaxTol && argmax_changes == 0 && entropy_drops == 0,
          "max |soften(tau=1) - softmax| " + fmt(worst) + ", argmax changes " + std::to_string(argmax_changes) +
              ", entropy decreases " + std::to_string(entropy_drops)};
}

Outcome loss_reductions() {
  std::mt19937_64 rng(105);
  int exact = 0, total = 0;
  double worst = 0;
  for (int trial = 0; trial < 40; ++trial) {
    KdInstance in = kd_instance(rng);
    const int blank = static_cast<int>(in.z.cols()) - 1;
    if (ctc_min_frames(in.target) > in.z.rows()) continue;
    DistillConfig zero = in.cfg;
    zero.alpha = 0.0;
    zero.kd_weight_mode = KdWeightMode::hinton;  // weight alpha * tau^2 = 0
    const CtcResult c = ctc_loss_from_logits(in.z, in.target, blank);
    const KdLoss a = lila_boti_loss(in.z, in.target, in.stack, zero);
    const KdLoss b = conventional_kd_loss(in.z, in.teacher, in.target, zero);
    ++total;
    exact += a.total == c.loss && b.total == c.loss && a.grad == c.grad && b.grad == c.grad;

    // Student logits whose softened output is the stack itself.
    Matrix z(in.z.rows(), in.z.cols());
    for (Eigen::Index t = 0; t < z.rows(); ++t)
      for (Eigen::Index k = 0; k < z.cols(); ++k) {
        const double p = in.stack.targets()(t, k);
        z(t, k) = in.cfg.tau * (p > 0 ? std::log(p) : -1000.0);
      }
    const KdLoss l = lila_boti_loss(z, in.target, in.stack, in.cfg);
    worst = std::max(worst, std::abs(l.total - (1.0 - in.cfg.alpha) * ctc_loss_from_logits(z, in.target, blank).loss));
  }
  return {exact == total && worst <= kReductionTol,
          std::to_string(exact) + "/" + std::to_string(total) + " bit-exact with zero KD weight, max |LILA - (1-a)CTC| " +
              fmt(worst)};
}

Outcome metric_anchors() {
  auto letters = [](const std::string& s) {
    GraphemeSequence out;
    for (char c : s) out.emplace_back(std::string(1, c));
    return out;
  };
  const double a = crr(letters("abcdx"), letters("abcde"));
  const double b = crr(letters("a"), letters("abcdefghij"));
  return {a == 80.0 && b == 10.0, "CRR(5, ED 1) = " + fmt(a, 17) + ", CRR(10, ED 9) = " + fmt(b, 17)};
}

Grapheme synthetic(int i) { return Grapheme(u32_to_utf8(std::u32string(1, static_cast<char32_t>(0xE000 + i)))); }

GraphemeInventory synthetic_inventory(const std::set<int>& ids) {
  std::map<Grapheme, std::uint64_t> counts;
  for (int i : ids) counts[synthetic(i)] = 1 + static_cast<std::uint64_t>(i % 7);
  return GraphemeInventory::from_counts(counts);
}

Outcome inventory_algebra() {
  std::set<int> a, b;
  for (int i = 0; i < 213; ++i) a.insert(i);
  for (int i = 42; i < 213; ++i) b.insert(i);  // 171 shared
  for (int i = 0; i < 6; ++i) b.insert(1000 + i);
  const auto ia = synthetic_inventory(a), ib = synthetic_inventory(b);
  std::size_t shared = 0;
  for (const auto& g : ia.graphemes()) shared += ib.contains(g);
  const std::size_t merged = merge_inventories(ia, ib).size();
  std::mt19937_64 rng(107);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::set<int> x, y;
    for (int i = static_cast<int>(rng() % 80); i > 0; --i) x.insert(static_cast<int>(rng() % 120));
    for (int i = static_cast<int>(rng() % 80); i > 0; --i) y.insert(static_cast<int>(rng() % 120));
    std::size_t common = 0;
    for (int v : x) common += y.count(v);
    const auto m = merge_inventories(synthetic_inventory(x), synthetic_inventory(y));
    violations += m.size() != x.size() + y.size() - common;
  }
  return {ia.size() == 213 && ib.size() == 177 && shared == 171 && merged == 219 && violations == 0,
          "|A| " + std::to_string(ia.size()) + ", |B| " + std::to_string(ib.size()) + ", |A n B| " + std::to_string(shared) +
              ", |A u B| " + std::to_string(merged) + ", inclusion-exclusion violations " + std::to_string(violations) +
              "/100"};
}

Outcome minority_rule() {
  int wrong = 0, checked = 0;
  for (std::uint64_t max : {10u, 100u, 250u, 1000u, 4870u}) {
    for (std::uint64_t s = 1; s <= max; ++s) {
      // strictly below a tenth of the maximum, in exact integer arithmetic
      const bool expect_minor = 10 * s < max;
      const auto inv = GraphemeInventory::from_counts({{Grapheme("m"), max}, {Grapheme("s"), s}});
      const auto split = split_minor_major(inv);
      wrong += split.minor.contains(Grapheme("s")) != expect_minor;
      wrong += is_minor_support(s, max) != expect_minor;
      wrong += split.minor.contains(Grapheme("m"));
      ++checked;
    }
  }
  const auto boundary = split_minor_major(GraphemeInventory::from_counts({{Grapheme("m"), 1000}, {Grapheme("s"), 100}}));
  const bool boundary_major = boundary.major.contains(Grapheme("s"));
  return {wrong == 0 && boundary_major,
          std::to_string(checked) + " supports checked, support = 10% of max is " +
              (boundary_major ? "major" : "minor") + ", errors " + std::to_string(wrong)};
}

Outcome edit_distance_oracle() {
  std::vector<std::vector<int>> all{{}}, frontier{{}};
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& s : frontier)
      for (int k = 0; k < 3; ++k) {
        auto e = s;
        e.push_back(k);
        next.push_back(e);
      }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& a : all)
    for (const auto& b : all) {
      ++pairs;
      mismatches += edit_distance<int>(a, b) != brute_force_edit_distance<int>(a, b);
    }
  std::mt19937_64 rng(109);
  int axiom_failures = 0;
  auto draw = [&] {
    std::vector<int> v(rng() % 9);
    for (int& x : v) x = static_cast<int>(rng() % 4);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    const std::size_t ab = edit_distance<int>(a, b);
    axiom_failures += edit_distance<int>(a, a) != 0;
    axiom_failures += ab != edit_distance<int>(b, a);
    axiom_failures += (ab == 0) != (a == b);
    axiom_failures += edit_distance<int>(a, c) > ab + edit_distance<int>(b, c);
  }
  return {mismatches == 0 && axiom_failures == 0, std::to_string(pairs) + " pairs vs recursion, " +
                                                      std::to_string(mismatches) + " mismatches; axiom failures " +
                                                      std::to_string(axiom_failures) + " on 1000 random triples"};
}

// --- toy experiments -----------------------------------------------------------

StudentConfig toy_student() {
  StudentConfig s;
  s.channels = {8, 16, 32, 32, 48};
  s.recurrent_hidden = 32;
  return s;
}

Outcome overfit(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  ToyCorpusSpec spec;
  spec.graphemes = toy_script_graphemes(6);
  spec.num_words = 8;
  spec.min_length = 2;
  spec.max_length = 4;
  spec.seed = 21;
  spec.writer_seed = 22;
  generate_toy_corpus(work / "overfit_data", spec);
  RunConfig c;
  c.seed = 1;
  c.train_manifest = work / "overfit_data" / "manifest.jsonl";
  c.output_dir = work / "overfit";
  c.val_fraction = 0.0;
  c.student = toy_student();
  c.student_optim.epochs = kOverfitEpochBudget;
  c.student_optim.batch_size = 8;
  c.student_optim.lr = 3e-3;
  const auto res = train_student(c, KdMode::none);
  const auto ev = evaluate_student(res.checkpoint, c.train_manifest);
  const double secs = seconds_since(t0);
  return {ev.report.wrr == 100.0 && secs < kOverfitSeconds,
          "train WRR " + fmt(ev.report.wrr) + "% after " + std::to_string(kOverfitEpochBudget) + " epochs, " +
              fmt(secs, 3) + "s"};
}

struct DirectionalSetup {
  fs::path train, test, teacher12, teacher15;
};

// Median of three.
double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

struct DirectionalResult {
  Outcome outcome;
  fs::path kd_checkpoint, none_checkpoint, teacher, test_manifest;
};

DirectionalResult directional(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  DirectionalResult out;
  const fs::path root = work / "directional";
  // Nine majority letters and three minority letters at a tenth of the weight.
  ToyCorpusSpec train;
  train.graphemes = toy_script_graphemes(12);
  train.weights = {1, 1.2, 0.9, 1.1, 1, 0.8, 1.3, 1, 0.9, 0.1, 0.1, 0.1};
  train.num_words = 2000;
  train.min_length = 2;
  train.max_length = 5;
  train.seed = 11;
  train.writer_seed = 100;
  generate_toy_corpus(root / "train", train);
  ToyCorpusSpec test = train;
  test.weights.clear();
  test.num_words = 400;
  test.seed = 12;
  test.writer_seed = 999;  // writer styles unseen in training
  test.split = "test";
  generate_toy_corpus(root / "test", test);
  out.test_manifest = root / "test" / "manifest.jsonl";

  RunConfig base;
  base.train_manifest = root / "train" / "manifest.jsonl";
  base.test_manifest = out.test_manifest;
  base.student = toy_student();
  base.student_optim.epochs = 12;
  base.teacher.arch = TeacherArch::conv2;
  base.teacher.width = 16;
  base.teacher_optim.epochs = 5;
  base.distill.alpha = 0.0125;
  base.distill.tau = 2.0;
  base.distill.kd_weight_mode = KdWeightMode::hinton;

  const auto train_manifest = load_manifest(base.train_manifest);
  const auto inv = build_inventory(train_manifest.labels());
  const auto split = split_minor_major(inv);
  if (split.minor.size() != 3)
    return {{false, "toy corpus has " + std::to_string(split.minor.size()) + " minor classes, expected 3"}};

  RunConfig t12 = base;
  t12.output_dir = root / "teacher12";
  const auto teacher12 = train_teacher(t12);
  RunConfig t15 = base;
  t15.output_dir = root / "teacher15";
  t15.teacher_graphemes = toy_script_graphemes(15);
  const auto teacher15 = train_teacher(t15);

  std::vector<double> f_none, f_lila, f_super;
  std::ostringstream per_seed;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto run = [&](KdMode mode, const fs::path& teacher) {
      RunConfig r = base;
      r.seed = seed;
      r.distill.kd_mode = mode;
      r.teacher_checkpoint = teacher;
      r.output_dir = root / (to_string(mode) + "_seed" + std::to_string(seed));
      const auto res = train_student(r, mode);
      const auto ev = evaluate_student(res.checkpoint, out.test_manifest);
      write_json_file(r.output_dir / "eval.json", ev.to_json());
      return std::pair{ev.report.f1_minor, res.checkpoint};
    };
    const auto [n, n_ckpt] = run(KdMode::none, {});
    const auto [l, l_ckpt] = run(KdMode::lila, teacher12.checkpoint);
    const auto [s, s_ckpt] = run(KdMode::super, teacher15.checkpoint);
    f_none.push_back(n);
    f_lila.push_back(l);
    f_super.push_back(s);
    per_seed << " seed " << seed << ": none " << fmt(n) << " lila " << fmt(l) << " super " << fmt(s) << ";";
    if (seed == 1) {
      out.none_checkpoint = n_ckpt;
      out.kd_checkpoint = l_ckpt;
      out.teacher = teacher12.checkpoint;
    }
  }
  const double mn = median3(f_none), ml = median3(f_lila), ms = median3(f_super);
  const double secs = seconds_since(t0);
  out.outcome = {ml >= mn && ms >= ml - kSuperSlack && secs < kDirectionalSeconds,
                 "median minor F1 none " + fmt(mn) + ", lila " + fmt(ml) + ", super " + fmt(ms) + " (" +
                     per_seed.str() + " " + fmt(secs, 4) + "s)"};
  return out;
}

double median_decode_seconds(const LoadedStudent& s, const std::vector<GrayImage>& images, int reps) {
  std::vector<double> t;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    decode_words(s, images);
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome teacher_free(const DirectionalResult& d) {
  if (d.kd_checkpoint.empty()) return {false, "no distilled student (directional run failed)"};
  const auto before = evaluate_student(d.kd_checkpoint, d.test_manifest).to_json().dump();
  // Move the teacher away instead of deleting it so a rerun can reuse the data.
  const fs::path parked = d.teacher.string() + ".parked";
  fs::rename(d.teacher, parked);
  std::string after;
  bool same = false;
  try {
    after = evaluate_student(d.kd_checkpoint, d.test_manifest).to_json().dump();
    same = after == before;
  } catch (const std::exception& e) {
    after = e.what();
  }
  const bool gone = !fs::exists(d.teacher);
  fs::rename(parked, d.teacher);

  LoadedStudent kd = load_student(d.kd_checkpoint), none = load_student(d.none_checkpoint);
  const auto m = load_manifest(d.test_manifest);
  std::vector<GrayImage> images;
  for (const auto& r : m.records) images.push_back(load_word_image(r, 32, 128));
  median_decode_seconds(none, images, 1);  // warm-up
  // Interleave the two models so drift affects both alike.
  std::vector<double> tk, tn;
  for (int i = 0; i < 5; ++i) {
    tn.push_back(median_decode_seconds(none, images, 1));
    tk.push_back(median_decode_seconds(kd, images, 1));
  }
  std::sort(tk.begin(), tk.end());
  std::sort(tn.begin(), tn.end());
  const double ratio = tk[2] / tn[2];
  const bool same_arch = kd.model.parameter_count() == none.model.parameter_count();
  return {gone && same && same_arch && std::abs(ratio - 1.0) <= kLatencyTolerance,
          std::string("evaluation without teacher ") + (same ? "identical" : "differs") + ", decode latency kd/none " +
              fmt(ratio, 3) + " (" + fmt(tk[2] * 1e3, 4) + " ms vs " + fmt(tn[2] * 1e3, 4) + " ms for " +
              std::to_string(images.size()) + " words)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome protocol_shape(const fs::path& work) {
  const fs::path root = work / "protocol";
  ToyCorpusSpec a;
  a.graphemes = toy_script_graphemes(6);
  a.num_words = 60;
  a.seed = 31;
  a.writer_seed = 32;
  generate_toy_corpus(root / "A", a);
  ToyCorpusSpec b = a;
  b.graphemes = toy_script_graphemes(8);
  b.graphemes.erase(b.graphemes.begin());  // B lacks the first letter, adds two
  b.seed = 33;
  b.writer_seed = 34;
  generate_toy_corpus(root / "B", b);

  auto run = [&](const std::string& out) {
    ProtocolConfig p;
    p.base.seed = 7;
    p.base.output_dir = root / out;
    p.base.student.channels = {4, 8, 8, 8, 8};
    p.base.student.recurrent_hidden = 8;
    p.base.student_optim.epochs = 2;
    p.base.student_optim.batch_size = 16;
    p.base.render.per_class_count = 8;
    p.base.teacher_optim.epochs = 1;
    p.name_a = "A";
    p.name_b = "B";
    p.manifest_a = root / "A" / "manifest.jsonl";
    p.manifest_b = root / "B" / "manifest.jsonl";
    p.conv2_teacher.width = 4;
    p.conv2_teacher.hidden = 8;
    p.resnet_teacher.width = 2;
    const auto r = run_protocol(p);
    emit_report(r, "tsv", root / out / "protocol.tsv");
    emit_report(r, "markdown", root / out / "protocol.md");
    return r;
  };
  const auto r1 = run("run1");
  run("run2");
  const std::string tsv = slurp(root / "run1" / "protocol.tsv");
  const bool identical = tsv == slurp(root / "run2" / "protocol.tsv") &&
                         slurp(root / "run1" / "protocol.md") == slurp(root / "run2" / "protocol.md") &&
                         slurp(root / "run1" / "protocol.json") == slurp(root / "run2" / "protocol.json");
  bool order = r1.rows.size() == 12;
  for (std::size_t i = 0; order && i < 12; ++i) order = r1.rows[i].config == kProtocolConfigs[i % 6];
  const std::string header = tsv.substr(0, tsv.find('\n'));
  const bool columns = header.ends_with("NED\tCRR\tWRR\tF1-all\tF1-minor\tF1-major");
  return {order && columns && identical, std::to_string(r1.rows.size()) + " rows, columns " +
                                             (columns ? "ok" : "wrong") + ", rerun " +
                                             (identical ? "byte-identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  fs::path workdir = fs::temp_directory_path() / "stackkd_acceptance";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "scratch directory for generated data and runs");
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(workdir);
  fs::create_directories(workdir);

  std::optional<DirectionalResult> dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CTC oracle", ctc_oracle},
      {"gradient checks", gradient_checks},
      {"stacking exhaustive", stacking_exhaustive},
      {"softening", softening},
      {"loss reductions", loss_reductions},
      {"metric anchors", metric_anchors},
      {"inventory algebra", inventory_algebra},
      {"minority rule", minority_rule},
      {"edit-distance oracle", edit_distance_oracle},
      {"overfit sanity", [&] { return overfit(workdir); }},
      {"directional distillation effect",
       [&] {
         dir = directional(workdir);
         return dir->outcome;
       }},
      {"teacher-free inference",
       [&] {
         if (!dir) dir = directional(workdir);
         return teacher_free(*dir);
       }},
      {"protocol shape", [&] { return protocol_shape(workdir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
