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

#include "stackkd/nn/layers.hpp"

#include <cmath>

namespace stackkd::nn {

namespace {

Tensor uniform(std::vector<int> shape, double bound, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

std::vector<Var> ParameterSet::vars() const {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& [name, v] : params) out.push_back(v);
  return out;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : params) n += v.value().size();
  return n;
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, bool bias,
               std::mt19937_64& rng)
    : Conv2d(in_channels, out_channels, kernel, kernel, stride, pad, bias, rng) {}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w, int stride, int pad, bool bias,
               std::mt19937_64& rng)
    : stride_(stride), pad_(pad) {
  const int fan_in = in_channels * kernel_h * kernel_w;
  // He-uniform for ReLU networks.
  weight_ = Var(uniform({out_channels, in_channels, kernel_h, kernel_w}, std::sqrt(6.0 / fan_in), rng), true);
  if (bias) bias_ = Var(Tensor({out_channels}), true);
}

void Conv2d::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".weight", weight_);
  if (bias_) set.params.emplace_back(prefix + ".bias", bias_);
}

BatchNorm2d::BatchNorm2d(int channels)
    : gamma_(Tensor({channels}, 1.0), true), beta_(Tensor({channels}), true),
      stats_{Tensor({channels}, 0.0), Tensor({channels}, 1.0)} {}

void BatchNorm2d::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".gamma", gamma_);
  set.params.emplace_back(prefix + ".beta", beta_);
  set.buffers.emplace_back(prefix + ".running_mean", &stats_.running_mean);
  set.buffers.emplace_back(prefix + ".running_var", &stats_.running_var);
}

Linear::Linear(int in_features, int out_features, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  weight_ = Var(uniform({out_features, in_features}, bound, rng), true);
  bias_ = Var(uniform({out_features}, bound, rng), true);
}

void Linear::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".weight", weight_);
  set.params.emplace_back(prefix + ".bias", bias_);
}

Lstm::Lstm(int input, int hidden, bool reverse, std::mt19937_64& rng) : reverse_(reverse) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_ih_ = Var(uniform({4 * hidden, input}, bound, rng), true);
  w_hh_ = Var(uniform({4 * hidden, hidden}, bound, rng), true);
  Tensor b({4 * hidden});
  for (int k = hidden; k < 2 * hidden; ++k) b[k] = 1.0;  // forget gate bias
  bias_ = Var(std::move(b), true);
}

void Lstm::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".w_ih", w_ih_);
  set.params.emplace_back(prefix + ".w_hh", w_hh_);
  set.params.emplace_back(prefix + ".bias", bias_);
}

BiLstm::BiLstm(int input, int hidden, std::mt19937_64& rng)
    : forward_(input, hidden, false, rng), backward_(input, hidden, true, rng) {}

void BiLstm::collect(ParameterSet& set, const std::string& prefix) {
  forward_.collect(set, prefix + ".fwd");
  backward_.collect(set, prefix + ".bwd");
}

}  // namespace stackkd::nn
