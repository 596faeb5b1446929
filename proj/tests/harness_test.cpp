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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stackkd/harness/config.hpp"
#include "stackkd/harness/dataset.hpp"
#include "stackkd/harness/protocol.hpp"
#include "stackkd/harness/toy.hpp"
#include "stackkd/harness/train.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace stackkd {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(Manifest, LoadsRecordsAndNormalizesLabels) {
  TempDir dir("manifest");
  write_png(dir.path() / "a.png", GrayImage(32, 128));
  write_text(dir.path() / "m.jsonl",
             "{\"image_path\": \"a.png\", \"label\": \"\\u0995\\u0996\", \"split\": \"train\"}\n\n"
             "{\"image_path\": \"a.png\", \"label\": \"\\u0995\", \"split\": \"train\"}\n");
  const auto m = load_manifest(dir.path() / "m.jsonl");
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].graphemes.size(), 2u);
  EXPECT_EQ(m.records[0].resolved, dir.path() / "a.png");
  EXPECT_TRUE(m.has_split_tags());
  EXPECT_EQ(m.indices_with_split("train").size(), 2u);
  EXPECT_EQ(load_manifest(dir.path() / "m.jsonl").checksum, m.checksum);
}

TEST(Manifest, MalformedLineReportsLineNumber) {
  TempDir dir("manifest");
  write_text(dir.path() / "m.jsonl", "{\"image_path\": \"a.png\", \"label\": \"x\"}\n{not json\n");
  EXPECT_NE(error_of([&] { load_manifest(dir.path() / "m.jsonl", false); }).find("m.jsonl:2: malformed line"),
            std::string::npos);
}

TEST(Manifest, RejectsBadSplitsAndFields) {
  TempDir dir("manifest");
  write_text(dir.path() / "a.jsonl", "{\"image_path\": \"a.png\", \"label\": \"x\", \"split\": \"dev\"}\n");
  EXPECT_NE(error_of([&] { load_manifest(dir.path() / "a.jsonl", false); }).find(":1: unknown split"), std::string::npos);
  write_text(dir.path() / "b.jsonl",
             "{\"image_path\": \"a.png\", \"label\": \"x\", \"split\": \"train\"}\n"
             "{\"image_path\": \"a.png\", \"label\": \"x\", \"split\": \"test\"}\n");
  EXPECT_NE(error_of([&] { load_manifest(dir.path() / "b.jsonl", false); }).find("two splits"), std::string::npos);
  write_text(dir.path() / "c.jsonl", "{\"image_path\": \"a.png\"}\n");
  EXPECT_NE(error_of([&] { load_manifest(dir.path() / "c.jsonl", false); }).find(":1:"), std::string::npos);
}

TEST(Manifest, ListsEveryMissingImage) {
  TempDir dir("manifest");
  write_text(dir.path() / "m.jsonl",
             "{\"image_path\": \"gone1.png\", \"label\": \"x\"}\n{\"image_path\": \"gone2.png\", \"label\": \"y\"}\n");
  const std::string msg = error_of([&] { load_manifest(dir.path() / "m.jsonl"); });
  EXPECT_NE(msg.find("gone1.png"), std::string::npos);
  EXPECT_NE(msg.find("gone2.png"), std::string::npos);
}

TEST(Partition, SeededDisjointAndSorted) {
  std::vector<std::size_t> c(100);
  std::iota(c.begin(), c.end(), 0);
  const Partition a = partition_records(c, 0.2, 5), b = partition_records(c, 0.2, 5), d = partition_records(c, 0.2, 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_NE(a.val, d.val);
  EXPECT_EQ(a.val.size(), 20u);
  EXPECT_TRUE(std::is_sorted(a.train.begin(), a.train.end()));
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  for (std::size_t v : a.val) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 100u);
  const Partition back = partition_from_json(partition_to_json(a));
  EXPECT_EQ(back.train, a.train);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_THROW(partition_records(c, 1.0, 1), Error);
}

TEST(RunConfig, OverlayKeepsUnsetDefaults) {
  const auto base = default_run_config();
  const RunConfig c = run_config_from_json(nlohmann::ordered_json::parse(
      R"({"seed": 7, "distill": {"tau": 4}, "student_optim": {"epochs": 3}, "data": {"val_fraction": 0.25}})"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.distill.tau, 4.0);
  EXPECT_EQ(c.distill.alpha, base.distill.alpha);
  EXPECT_EQ(c.student_optim.epochs, 3);
  EXPECT_EQ(c.student_optim.lr, base.student_optim.lr);
  EXPECT_EQ(c.val_fraction, 0.25);
  const RunConfig again = run_config_from_json(run_config_to_json(c));
  EXPECT_EQ(run_config_to_json(again).dump(), run_config_to_json(c).dump());
  EXPECT_THROW(run_config_from_json(nlohmann::ordered_json::parse(R"({"distill": {"alpha": 2}})")), Error);
  EXPECT_THROW(run_config_from_json(nlohmann::ordered_json::parse(R"({"student_optim": {"name": "lbfgs"}})")), Error);
}

TEST(RunConfig, LoadsFileWithComments) {
  TempDir dir("config");
  write_text(dir.path() / "c.json", "{\n  // run seed\n  \"seed\": 3\n}\n");
  EXPECT_EQ(load_run_config(dir.path() / "c.json").seed, 3u);
  write_text(dir.path() / "bad.json", "{\"seed\": }");
  EXPECT_THROW(load_run_config(dir.path() / "bad.json"), Error);
}

ToyCorpusSpec toy_spec(std::size_t words, std::uint64_t seed) {
  ToyCorpusSpec s;
  s.graphemes = toy_script_graphemes(4);
  s.num_words = words;
  s.min_length = 1;
  s.max_length = 3;
  s.seed = seed;
  s.writer_seed = seed + 100;
  return s;
}

TEST(ToyCorpus, DeterministicForFixedSeeds) {
  TempDir a("toy"), b("toy");
  const auto ra = generate_toy_corpus(a.path(), toy_spec(12, 1));
  const auto rb = generate_toy_corpus(b.path(), toy_spec(12, 1));
  ASSERT_EQ(ra.size(), 12u);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].label, rb[i].label);
    EXPECT_EQ(read_png(ra[i].resolved), read_png(rb[i].resolved));
  }
  const auto m = load_manifest(a.path() / "manifest.jsonl");
  EXPECT_EQ(m.records.size(), 12u);
}

// Tiny shared fixture: a 4-letter toy corpus and a glyph teacher trained on it.
class TinyTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("train");
    generate_toy_corpus(dir_->path() / "train", toy_spec(24, 3));
    ToyCorpusSpec test = toy_spec(10, 4);
    test.split = "test";
    generate_toy_corpus(dir_->path() / "test", test);
    RunConfig t = base();
    t.output_dir = dir_->path() / "teacher";
    train_teacher(t);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static RunConfig base() {
    RunConfig c;
    c.seed = 5;
    c.train_manifest = dir_->path() / "train" / "manifest.jsonl";
    c.test_manifest = dir_->path() / "test" / "manifest.jsonl";
    c.render.per_class_count = 6;
    c.teacher.width = 4;
    c.teacher.hidden = 8;
    c.teacher_optim.epochs = 1;
    c.student.channels = {4, 4, 8, 8, 8};
    c.student.recurrent_hidden = 6;
    c.student_optim.epochs = 1;
    c.student_optim.batch_size = 8;
    c.val_fraction = 0.25;
    c.teacher_checkpoint = dir_->path() / "teacher" / "teacher.ckpt";
    return c;
  }
  static fs::path path(const std::string& leaf) { return dir_->path() / leaf; }
  static TempDir* dir_;
};
TempDir* TinyTraining::dir_ = nullptr;

TEST_F(TinyTraining, StudentWritesArtifacts) {
  RunConfig c = base();
  c.output_dir = path("none");
  const auto r = train_student(c, KdMode::none);
  EXPECT_EQ(r.num_train + r.num_val, 24u);
  EXPECT_EQ(r.num_val, 6u);
  EXPECT_TRUE(fs::exists(path("none") / "student.ckpt"));
  EXPECT_TRUE(fs::exists(path("none") / "partition.json"));
  EXPECT_TRUE(fs::exists(path("none") / "train_log.json"));
  EXPECT_EQ(r.teacher_calls, 0u);
}

TEST_F(TinyTraining, ZeroKdWeightMatchesNoDistillation) {
  RunConfig c = base();
  c.output_dir = path("z_none");
  const auto none = train_student(c, KdMode::none);
  c.output_dir = path("z_lila");
  c.distill.alpha = 0.0;
  c.distill.kd_weight_mode = KdWeightMode::hinton;
  const auto lila = train_student(c, KdMode::lila);
  EXPECT_EQ(none.batch_losses, lila.batch_losses);
  EXPECT_GT(lila.teacher_calls, 0u);
  const auto a = read_checkpoint(path("z_none") / "student.ckpt"), b = read_checkpoint(path("z_lila") / "student.ckpt");
  ASSERT_EQ(a.tensors.size(), b.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) EXPECT_EQ(a.tensors[i].second, b.tensors[i].second) << a.tensors[i].first;
}

TEST_F(TinyTraining, SameSeedSameWeights) {
  RunConfig c = base();
  c.output_dir = path("d1");
  train_student(c, KdMode::lila);
  c.output_dir = path("d2");
  train_student(c, KdMode::lila);
  const auto a = read_checkpoint(path("d1") / "student.ckpt"), b = read_checkpoint(path("d2") / "student.ckpt");
  for (std::size_t i = 0; i < a.tensors.size(); ++i) EXPECT_EQ(a.tensors[i].second, b.tensors[i].second) << a.tensors[i].first;
}

TEST_F(TinyTraining, SuperWithIdenticalInventoryEqualsLila) {
  RunConfig c = base();
  c.output_dir = path("s_lila");
  const auto lila = train_student(c, KdMode::lila);
  c.output_dir = path("s_super");
  const auto super = train_student(c, KdMode::super);
  EXPECT_EQ(lila.batch_losses, super.batch_losses);
}

TEST_F(TinyTraining, EvaluationIsDeterministicAndUsesTestRecords) {
  RunConfig c = base();
  c.output_dir = path("eval");
  train_student(c, KdMode::none);
  const auto a = evaluate_student(path("eval") / "student.ckpt", c.test_manifest);
  const auto b = evaluate_student(path("eval") / "student.ckpt", c.test_manifest);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.report.num_words, 10u);
  EXPECT_EQ(a.seed, 5u);
}

TEST_F(TinyTraining, UnemittableWordsAreSkipped) {
  // 16 repeats need 31 frames, 17 need 33.
  std::string fits, too_long;
  for (int i = 0; i < 16; ++i) fits += "\u0995";
  too_long = fits + "\u0995";
  const auto m = load_manifest(base().train_manifest);
  std::ostringstream lines;
  for (const auto& r : m.records)
    lines << nlohmann::json{{"image_path", r.resolved.string()}, {"label", r.label}}.dump() << "\n";
  lines << nlohmann::json{{"image_path", m.records[0].resolved.string()}, {"label", fits}}.dump() << "\n";
  lines << nlohmann::json{{"image_path", m.records[1].resolved.string()}, {"label", too_long}}.dump() << "\n";
  write_text(path("skip.jsonl"), lines.str());
  RunConfig c = base();
  c.train_manifest = path("skip.jsonl");
  c.output_dir = path("skip");
  const auto r = train_student(c, KdMode::none);
  EXPECT_EQ(r.num_skipped, 1u);
  EXPECT_EQ(r.num_train + r.num_val, 25u);
}

TEST_F(TinyTraining, DistillationWithoutTeacherFails) {
  RunConfig c = base();
  c.teacher_checkpoint.clear();
  c.output_dir = path("noteacher");
  EXPECT_THROW(train_student(c, KdMode::lila), Error);
  EXPECT_THROW(train_student(c, KdMode::conventional), Error);
}

ProtocolReport fake_report() {
  ProtocolReport r;
  r.seed = 3;
  r.complete = true;
  for (const char* dir : {"A", "B"})
    for (auto name : kProtocolConfigs) {
      ProtocolRow row;
      row.train = dir;
      row.test = std::string(dir) == "A" ? "B" : "A";
      row.config = std::string(name);
      row.report.crr = 50.0;
      r.rows.push_back(row);
    }
  return r;
}

TEST(ProtocolReport, FormatsHaveTwelveRowsInOrder) {
  const ProtocolReport r = fake_report();
  const std::string tsv = render_report(r, "tsv");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 13);
  EXPECT_NE(tsv.find("NED\tCRR\tWRR\tF1-all\tF1-minor\tF1-major"), std::string::npos);
  const std::string md = render_report(r, "markdown");
  std::size_t pos = 0;
  for (auto name : kProtocolConfigs) {
    const std::size_t at = md.find(std::string(name), pos);
    ASSERT_NE(at, std::string::npos);
    pos = at;
  }
  const ProtocolReport back = protocol_from_json(protocol_to_json(r));
  EXPECT_EQ(render_report(back, "json"), render_report(r, "json"));
  EXPECT_THROW(render_report(r, "xml"), Error);
}

TEST(ProtocolConfig, SlugsRoundTrip) {
  for (auto name : kProtocolConfigs) EXPECT_EQ(parse_protocol_config(protocol_config_slug(name)), name);
  EXPECT_EQ(protocol_config_slug("No KD"), "no_kd");
  EXPECT_THROW(parse_protocol_config("best"), Error);
}

}  // namespace
}  // namespace stackkd
