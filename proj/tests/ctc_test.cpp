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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stackkd/prob.hpp"

#include <cmath>

namespace stackkd {
namespace {

using testing::brute_force_ctc_probability;
using testing::numeric_gradient;
using testing::random_matrix;
using testing::relative_error;

// Every target of length 1..max_len over labels [0, num_labels).
std::vector<std::vector<int>> all_targets(int num_labels, int max_len) {
  std::vector<std::vector<int>> out, frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& t : frontier)
      for (int k = 0; k < num_labels; ++k) {
        auto e = t;
        e.push_back(k);
        next.push_back(e);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

TEST(CtcLoss, MatchesPathEnumerationOnAllSmallInstances) {
  std::mt19937_64 rng(20);
  int checked = 0;
  for (int T = 1; T <= 6; ++T)
    for (int C = 2; C <= 4; ++C) {
      const int blank = C - 1;
      const Matrix lp = log_softmax_rows(random_matrix(T, C, rng, 1.5));
      for (const auto& target : all_targets(C - 1, 3)) {
        const double p = brute_force_ctc_probability(lp, target, blank);
        const CtcResult r = ctc_loss(lp, target, blank);
        const bool feasible = ctc_min_frames(target) <= T;
        ASSERT_EQ(r.feasible, feasible);
        if (!feasible) {
          EXPECT_EQ(p, 0.0);
          EXPECT_TRUE(std::isinf(r.loss));
          continue;
        }
        EXPECT_NEAR(r.loss, -std::log(p), 1e-10) << "T=" << T << " C=" << C;
        ++checked;
      }
    }
  EXPECT_GT(checked, 200);
}

TEST(CtcLoss, MinFramesCountsRepeats) {
  EXPECT_EQ(ctc_min_frames(std::vector<int>{0}), 1);
  EXPECT_EQ(ctc_min_frames(std::vector<int>{0, 1}), 2);
  EXPECT_EQ(ctc_min_frames(std::vector<int>{0, 0}), 3);
  EXPECT_EQ(ctc_min_frames(std::vector<int>{1, 1, 1}), 5);
}

TEST(CtcLoss, InfeasibleGivesZeroGradient) {
  std::mt19937_64 rng(1);
  const Matrix lp = log_softmax_rows(random_matrix(2, 3, rng));
  const CtcResult r = ctc_loss(lp, std::vector<int>{0, 0}, 2);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(std::isinf(r.loss) && r.loss > 0);
  EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(CtcLoss, RejectsBadArguments) {
  const Matrix lp = Matrix::Constant(3, 3, std::log(1.0 / 3));
  EXPECT_THROW(ctc_loss(lp, std::vector<int>{}, 2), Error);
  EXPECT_THROW(ctc_loss(lp, std::vector<int>{2}, 2), Error);
  EXPECT_THROW(ctc_loss(lp, std::vector<int>{-1}, 2), Error);
  EXPECT_THROW(ctc_loss(lp, std::vector<int>{0}, 1), Error);
}

TEST(CtcLoss, UniformSingleFrame) {
  const Matrix lp = Matrix::Constant(1, 4, std::log(0.25));
  EXPECT_NEAR(ctc_loss(lp, std::vector<int>{2}, 3).loss, std::log(4.0), 1e-14);
}

TEST(CtcGradient, LogProbEntriesMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const int T = 3 + trial % 6, C = 3 + trial % 3;
    std::uniform_int_distribution<int> lab(0, C - 2), len(1, 3);
    std::vector<int> target(static_cast<std::size_t>(len(rng)));
    for (int& k : target) k = lab(rng);
    if (ctc_min_frames(target) > T) continue;
    const Matrix lp = log_softmax_rows(random_matrix(T, C, rng));
    const auto f = [&](const Matrix& m) { return ctc_loss(m, target, C - 1).loss; };
    EXPECT_LT(relative_error(ctc_loss(lp, target, C - 1).grad, numeric_gradient(f, lp)), 1e-4);
  }
}

TEST(CtcGradient, LogitsMatchFiniteDifferences) {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int trial = 0; checked < 25; ++trial) {
    const int T = 3 + trial % 8, C = 3 + trial % 4;
    std::uniform_int_distribution<int> lab(0, C - 2), len(1, 4);
    std::vector<int> target(static_cast<std::size_t>(len(rng)));
    for (int& k : target) k = lab(rng);
    if (ctc_min_frames(target) > T) continue;
    const Matrix z = random_matrix(T, C, rng, 2.0);
    const auto f = [&](const Matrix& m) { return ctc_loss_from_logits(m, target, C - 1).loss; };
    const Matrix g = ctc_loss_from_logits(z, target, C - 1).grad;
    EXPECT_LT(relative_error(g, numeric_gradient(f, z)), 1e-4) << "trial " << trial;
    // Shift invariance of softmax: each gradient row sums to zero.
    for (int t = 0; t < T; ++t) EXPECT_NEAR(g.row(t).sum(), 0.0, 1e-10);
    ++checked;
  }
}

TEST(CtcGradient, StableWithPeakedLogits) {
  Matrix z = Matrix::Constant(31, 5, -40.0);
  for (int t = 0; t < 31; ++t) z(t, t < 15 ? 0 : 1) = 40.0;
  const CtcResult r = ctc_loss_from_logits(z, std::vector<int>{0, 1}, 4);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_TRUE(r.grad.allFinite());
}

Matrix one_hot_rows(const std::vector<int>& argmaxes, int C) {
  Matrix m = Matrix::Constant(static_cast<Eigen::Index>(argmaxes.size()), C, 0.05);
  for (std::size_t t = 0; t < argmaxes.size(); ++t) m(static_cast<Eigen::Index>(t), argmaxes[t]) = 0.9;
  return m;
}

TEST(GreedyDecode, MergesRepeatsAndDropsBlanks) {
  EXPECT_EQ(ctc_greedy_decode(one_hot_rows({0, 0, 3, 0, 1, 1, 3, 3, 2}, 4), 3), (std::vector<int>{0, 0, 1, 2}));
  EXPECT_EQ(ctc_greedy_decode(one_hot_rows({3, 3, 3}, 4), 3), std::vector<int>{});
  EXPECT_EQ(ctc_greedy_decode(one_hot_rows({2, 2, 2}, 4), 3), std::vector<int>{2});
}

TEST(GreedyDecode, TiesGoToLowerIndex) {
  Matrix m(1, 3);
  m << 0.2, 0.4, 0.4;
  EXPECT_EQ(ctc_greedy_decode(m, 2), std::vector<int>{1});
  m << 0.3, 0.3, 0.4;
  m(0, 2) = 0.3;
  EXPECT_EQ(ctc_greedy_decode(m, 2), std::vector<int>{0});
}

}  // namespace
}  // namespace stackkd
