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

// Based on A. Graves et al., "Connectionist Temporal Classification: Labelling
// Unsegmented Sequence Data with Recurrent Neural Networks", ICML 2006.

#include "stackkd/ctc.hpp"

#include "stackkd/prob.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace stackkd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

void validate(const Matrix& m, std::span<const int> target, int blank) {
  if (m.rows() < 1 || m.cols() < 2) throw Error("ctc: need at least one frame and two classes");
  if (blank != m.cols() - 1) throw Error("ctc: blank must be the last class");
  if (target.empty()) throw Error("ctc: empty target");
  for (int k : target)
    if (k < 0 || k >= blank) throw Error("ctc: target index " + std::to_string(k) + " out of range");
}

}  // namespace

int ctc_min_frames(std::span<const int> target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcResult ctc_loss(const Matrix& log_probs, std::span<const int> target, int blank) {
  validate(log_probs, target, blank);
  const int T = static_cast<int>(log_probs.rows());
  CtcResult out;
  out.grad = Matrix::Zero(log_probs.rows(), log_probs.cols());
  if (ctc_min_frames(target) > T) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }

  // Blank-augmented label: blank, l1, blank, l2, ..., blank.
  const int S = 2 * static_cast<int>(target.size()) + 1;
  std::vector<int> ext(static_cast<std::size_t>(S), blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]; };

  Matrix alpha = Matrix::Constant(T, S, kNegInf);
  alpha(0, 0) = log_probs(0, blank);
  if (S > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (int t = 1; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = log_add(a, alpha(t - 1, s - 2));
      if (a != kNegInf) alpha(t, s) = a + log_probs(t, ext[s]);
    }
  const double log_p = log_add(alpha(T - 1, S - 1), alpha(T - 1, S - 2));
  if (log_p == kNegInf) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }
  out.loss = -log_p;

  // beta(t, s): log mass of completing from state s at frame t, excluding the
  // emission at t itself.
  Matrix beta = Matrix::Constant(T, S, kNegInf);
  beta(T - 1, S - 1) = 0.0;
  beta(T - 1, S - 2) = 0.0;
  for (int t = T - 2; t >= 0; --t)
    for (int s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      if (s + 2 < S && can_skip(s + 2)) b = log_add(b, beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      beta(t, s) = b;
    }

  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      const double v = alpha(t, s) + beta(t, s);
      if (v != kNegInf) out.grad(t, ext[s]) -= std::exp(v - log_p);
    }
  return out;
}

CtcResult ctc_loss_from_logits(const Matrix& logits, std::span<const int> target, int blank) {
  validate(logits, target, blank);
  CtcResult r = ctc_loss(log_softmax_rows(logits), target, blank);
  if (!r.feasible) return r;
  // Chain through log-softmax: dz = g - softmax * sum(g).
  const Matrix p = softmax_rows(logits);
  for (Eigen::Index t = 0; t < r.grad.rows(); ++t) {
    const double s = r.grad.row(t).sum();
    r.grad.row(t) -= s * p.row(t);
  }
  return r;
}

std::vector<int> ctc_greedy_decode(const Matrix& probs, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    const int k = static_cast<int>(
        argmax(std::span<const double>(probs.row(t).data(), static_cast<std::size_t>(probs.cols()))));
    if (k != blank && k != prev) out.push_back(k);
    prev = k;
  }
  return out;
}

}  // namespace stackkd
