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

// Based on G. Hinton et al., "Distilling the Knowledge in a Neural Network",
// 2015, for the softened KL term.

#include "stackkd/distill.hpp"

#include "stackkd/ctc.hpp"
#include "stackkd/prob.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stackkd {

std::string to_string(KdMode m) {
  switch (m) {
    case KdMode::none: return "none";
    case KdMode::conventional: return "conventional";
    case KdMode::lila: return "lila";
    case KdMode::super: return "super";
  }
  return "none";
}

std::string to_string(KdWeightMode m) { return m == KdWeightMode::paper ? "paper" : "hinton"; }

KdMode parse_kd_mode(std::string_view s) {
  if (s == "none") return KdMode::none;
  if (s == "conventional") return KdMode::conventional;
  if (s == "lila") return KdMode::lila;
  if (s == "super") return KdMode::super;
  throw Error("unknown kd mode: " + std::string(s));
}

KdWeightMode parse_kd_weight_mode(std::string_view s) {
  if (s == "paper") return KdWeightMode::paper;
  if (s == "hinton") return KdWeightMode::hinton;
  throw Error("unknown kd weight mode: " + std::string(s));
}

void DistillConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must be in [0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("tau must be > 0");
  if (retry_cap < 1) throw Error("retry_cap must be >= 1");
}

double DistillConfig::kd_weight() const {
  return kd_weight_mode == KdWeightMode::paper ? tau * tau + alpha : alpha * tau * tau;
}

void to_json(nlohmann::ordered_json& j, const DistillConfig& c) {
  j = nlohmann::ordered_json{{"alpha", c.alpha},
                             {"tau", c.tau},
                             {"kd_mode", to_string(c.kd_mode)},
                             {"kd_weight_mode", to_string(c.kd_weight_mode)},
                             {"retry_cap", c.retry_cap}};
}

void from_json(const nlohmann::ordered_json& j, DistillConfig& c) {
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  if (j.contains("kd_mode")) c.kd_mode = parse_kd_mode(j.at("kd_mode").get<std::string>());
  if (j.contains("kd_weight_mode"))
    c.kd_weight_mode = parse_kd_weight_mode(j.at("kd_weight_mode").get<std::string>());
  if (j.contains("retry_cap")) c.retry_cap = j.at("retry_cap").get<int>();
  c.validate();
}

std::vector<double> soften(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) throw Error("soften: tau must be > 0");
  std::vector<double> z(logits.begin(), logits.end());
  for (double& v : z) {
    if (!std::isfinite(v)) throw Error("soften: non-finite logit");
    v /= tau;
  }
  return softmax(z);
}

Matrix soften_rows(const Matrix& logits, double tau) {
  if (!(tau > 0.0)) throw Error("soften: tau must be > 0");
  return softmax_rows(logits / tau);
}

GlyphPool::GlyphPool(std::vector<GlyphSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) by_label_[samples_[i].label].push_back(i);
}

std::span<const std::size_t> GlyphPool::indices_of(const Grapheme& g) const {
  auto it = by_label_.find(g);
  if (it == by_label_.end()) return {};
  return it->second;
}

TeacherSelection select_verified_teacher_sample(const Grapheme& g, std::size_t teacher_class,
                                                const TeacherFn& teacher, const GlyphPool& pool,
                                                int retry_cap, double tau, std::uint64_t draw_seed,
                                                std::vector<SelectionWarning>* warnings) {
  if (retry_cap < 1) throw Error("retry_cap must be >= 1");
  auto idx = pool.indices_of(g);
  if (idx.empty()) throw Error("glyph pool has no sample of '" + g.text() + "'");

  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::mt19937_64 rng(draw_seed);
  const std::size_t tries = std::min(order.size(), static_cast<std::size_t>(retry_cap));
  TeacherSelection best;
  double best_mass = -1.0;
  for (std::size_t i = 0; i < tries; ++i) {
    // partial Fisher-Yates: only the prefix we visit is shuffled
    std::swap(order[i], order[i + rng() % (order.size() - i)]);
    const std::size_t k = order[i];
    std::vector<double> logits = teacher(k, pool.at(k));
    if (teacher_class >= logits.size()) throw Error("teacher class index out of range");
    const int calls = static_cast<int>(i) + 1;
    if (argmax(logits) == teacher_class) {
      TeacherSelection out;
      out.distribution = soften(logits, tau);
      out.logits = std::move(logits);
      out.sample_index = k;
      out.teacher_calls = calls;
      out.verified = true;
      return out;
    }
    std::vector<double> dist = soften(logits, tau);
    if (dist[teacher_class] > best_mass) {
      best_mass = dist[teacher_class];
      best.distribution = std::move(dist);
      best.logits = std::move(logits);
      best.sample_index = k;
    }
    best.teacher_calls = calls;
  }
  if (warnings) warnings->push_back({g, best.teacher_calls, best_mass});
  return best;
}

TeacherStack stack_teacher_outputs(std::span<const std::vector<double>> per_grapheme, int n_seq) {
  const int n_x = static_cast<int>(per_grapheme.size());
  if (n_x == 0) throw Error("stack_teacher_outputs: empty label");
  if (n_x > n_seq) throw Error("label longer than output sequence");
  const std::size_t k = per_grapheme.front().size();
  if (k == 0) throw Error("stack_teacher_outputs: empty distribution");
  for (const auto& v : per_grapheme)
    if (v.size() != k) throw Error("stack_teacher_outputs: distributions differ in length");

  const int block = n_seq / n_x;
  Matrix m = Matrix::Zero(n_seq, static_cast<Eigen::Index>(k) + 1);
  for (int r = 0; r < n_seq; ++r) {
    const int src = std::min(r / block, n_x - 1);
    for (std::size_t c = 0; c < k; ++c) m(r, static_cast<Eigen::Index>(c)) = per_grapheme[src][c];
  }
  return TeacherStack(std::move(m));
}

std::vector<double> project_super_teacher(std::span<const double> teacher_logits,
                                          std::span<const std::size_t> mapping, double tau) {
  if (mapping.empty()) throw Error("project_super_teacher: empty mapping");
  std::vector<double> sub;
  sub.reserve(mapping.size());
  for (std::size_t t : mapping) {
    if (t >= teacher_logits.size()) throw Error("project_super_teacher: teacher index out of range");
    sub.push_back(teacher_logits[t]);
  }
  return soften(sub, tau);
}

std::vector<std::size_t> build_class_mapping(const GraphemeInventory& student,
                                             const GraphemeInventory& teacher) {
  std::vector<std::size_t> out;
  out.reserve(student.size());
  for (const auto& e : student.entries()) {
    auto t = teacher.index_of(e.grapheme);
    if (!t) throw Error("teacher inventory lacks '" + e.grapheme.text() + "'");
    out.push_back(*t);
  }
  return out;
}

double mean_kl_to_softened(const Matrix& targets, const Matrix& student_logits, double tau,
                           Matrix* grad) {
  if (targets.rows() != student_logits.rows() || targets.cols() != student_logits.cols())
    throw Error("kl: shape mismatch (" + std::to_string(targets.rows()) + "x" +
                std::to_string(targets.cols()) + " vs " + std::to_string(student_logits.rows()) +
                "x" + std::to_string(student_logits.cols()) + ")");
  const Matrix logq = log_softmax_rows(student_logits / tau);
  const double T = static_cast<double>(targets.rows());
  double kl = 0.0;
  for (Eigen::Index t = 0; t < targets.rows(); ++t)
    for (Eigen::Index c = 0; c < targets.cols(); ++c) {
      const double p = targets(t, c);
      if (p > 0.0) kl += p * (std::log(p) - logq(t, c));
    }
  if (grad) {
    *grad = Matrix(targets.rows(), targets.cols());
    for (Eigen::Index t = 0; t < targets.rows(); ++t) {
      const double mass = targets.row(t).sum();
      for (Eigen::Index c = 0; c < targets.cols(); ++c)
        (*grad)(t, c) = (std::exp(logq(t, c)) * mass - targets(t, c)) / (tau * T);
    }
  }
  return kl / T;
}

namespace {

KdLoss combine(const Matrix& student_logits, std::span<const int> target, const Matrix& targets,
               const DistillConfig& cfg) {
  cfg.validate();
  const int blank = static_cast<int>(student_logits.cols()) - 1;
  CtcResult c = ctc_loss_from_logits(student_logits, target, blank);
  KdLoss out;
  out.ctc = c.loss;
  if (!c.feasible) {
    out.feasible = false;
    out.total = c.loss;
    out.grad = Matrix::Zero(student_logits.rows(), student_logits.cols());
    return out;
  }
  Matrix gkl;
  out.kl = mean_kl_to_softened(targets, student_logits, cfg.tau, &gkl);
  const double wc = cfg.ctc_weight(), wk = cfg.kd_weight();
  out.total = wc * out.ctc + wk * out.kl;
  out.grad = wc * c.grad + wk * gkl;
  return out;
}

}  // namespace

KdLoss lila_boti_loss(const Matrix& student_logits, std::span<const int> target,
                      const TeacherStack& stack, const DistillConfig& cfg) {
  if (stack.n_seq() != student_logits.rows() || stack.num_classes() != student_logits.cols())
    throw Error("lila_boti_loss: stack shape does not match student logits");
  return combine(student_logits, target, stack.targets(), cfg);
}

KdLoss conventional_kd_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                            std::span<const int> target, const DistillConfig& cfg) {
  if (teacher_logits.rows() != student_logits.rows() || teacher_logits.cols() != student_logits.cols())
    throw Error("conventional_kd_loss: teacher and student logits differ in shape");
  cfg.validate();
  return combine(student_logits, target, soften_rows(teacher_logits, cfg.tau), cfg);
}

}  // namespace stackkd
