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

#include "stackkd/nn/optim.hpp"

#include <cmath>

namespace stackkd::nn {

double clip_grad_norm(const std::vector<Var>& params, double max_norm) {
  double sq = 0;
  for (const auto& p : params)
    if (p.has_grad())
      for (double g : p.grad().values()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto p : params)
      if (p.has_grad())
        for (double& g : p.mutable_grad().values()) g *= scale;
  }
  return norm;
}

void zero_grad(const std::vector<Var>& params) {
  for (auto p : params) p.zero_grad();
}

SgdMomentum::SgdMomentum(std::vector<Var> params, double lr, double momentum, double weight_decay)
    : Optimizer(std::move(params)), lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {
  for (const auto& p : params_) velocity_.emplace_back(p.shape());
}

void SgdMomentum::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) continue;
    auto& w = params_[i].mutable_value();
    const auto& g = params_[i].grad();
    auto& v = velocity_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = momentum_ * v[k] + g[k] + weight_decay_ * w[k];
      w[k] -= lr_ * v[k];
    }
  }
}

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : Optimizer(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

void Adam::step() {
  ++step_count_;
  const double c1 = 1 - std::pow(beta1_, static_cast<double>(step_count_));
  const double c2 = 1 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) continue;
    auto& w = params_[i].mutable_value();
    const auto& g = params_[i].grad();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m_[i][k] = beta1_ * m_[i][k] + (1 - beta1_) * g[k];
      v_[i][k] = beta2_ * v_[i][k] + (1 - beta2_) * g[k] * g[k];
      w[k] -= lr_ * (m_[i][k] / c1) / (std::sqrt(v_[i][k] / c2) + eps_);
    }
  }
}

}  // namespace stackkd::nn
