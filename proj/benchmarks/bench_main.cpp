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

#include "stackkd/ctc.hpp"
#include "stackkd/distill.hpp"
#include "stackkd/metrics.hpp"
#include "stackkd/models.hpp"
#include "stackkd/prob.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace stackkd;

Matrix random_logits(int T, int C, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(T, C);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_CtcLoss(benchmark::State& state) {
  const int C = static_cast<int>(state.range(0));
  const Matrix z = random_logits(31, C, 1);
  const std::vector<int> target{0, 3, 3, 1, 7 % (C - 1), 2};
  for (auto _ : state) benchmark::DoNotOptimize(ctc_loss_from_logits(z, target, C - 1));
}
BENCHMARK(BM_CtcLoss)->Arg(16)->Arg(64)->Arg(220);

void BM_LilaBotiLoss(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const Matrix z = random_logits(31, K + 1, 2);
  const std::vector<int> target{0, 3, 1, 2, 5};
  std::vector<std::vector<double>> per;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Matrix r = random_logits(1, K, 3 + i);
    per.push_back(softmax(std::vector<double>(r.data(), r.data() + K)));
  }
  const TeacherStack stack = stack_teacher_outputs(per, 31);
  DistillConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(lila_boti_loss(z, target, stack, cfg));
}
BENCHMARK(BM_LilaBotiLoss)->Arg(64)->Arg(220);

void BM_EditDistance(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<int> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (int& x : a) x = static_cast<int>(rng() % 30);
  for (int& x : b) x = static_cast<int>(rng() % 30);
  for (auto _ : state) benchmark::DoNotOptimize(edit_distance<int>(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(8)->Arg(32)->Arg(128);

void BM_StudentForward(benchmark::State& state) {
  StudentConfig cfg;
  cfg.num_classes = 65;
  if (state.range(0) == 0) {
    cfg.channels = {8, 16, 32, 32, 48};
    cfg.recurrent_hidden = 32;
  }
  const StudentModel model(cfg, 5);
  GrayImage image(cfg.input_height, cfg.input_width);
  std::mt19937_64 rng(6);
  for (double& p : image.pixels()) p = static_cast<double>(rng() % 256) / 255.0;
  for (auto _ : state) benchmark::DoNotOptimize(student_forward(model, image));
}
// 0: small toy student, 1: default widths
BENCHMARK(BM_StudentForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
