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

#pragma once

#include "stackkd/nn/ops.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace stackkd::nn {

// Named views of a model's trainable parameters and non-trainable buffers.
struct ParameterSet {
  std::vector<std::pair<std::string, Var>> params;
  std::vector<std::pair<std::string, Tensor*>> buffers;

  std::vector<Var> vars() const;
  std::size_t parameter_count() const;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, bool bias, std::mt19937_64& rng);
  Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w, int stride, int pad, bool bias,
         std::mt19937_64& rng);

  Var operator()(const Var& x) const { return conv2d(x, weight_, bias_, stride_, pad_); }
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Var weight_;
  Var bias_;
  int stride_ = 1;
  int pad_ = 0;
};

class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);

  Var train(const Var& x) { return batch_norm_training(x, gamma_, beta_, stats_); }
  Var operator()(const Var& x) const { return batch_norm_inference(x, gamma_, beta_, stats_); }
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Var gamma_;
  Var beta_;
  BatchNormStats stats_;
};

class Linear {
 public:
  Linear() = default;
  Linear(int in_features, int out_features, std::mt19937_64& rng);

  Var operator()(const Var& x) const { return linear(x, weight_, bias_); }
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Var weight_;
  Var bias_;
};

class Lstm {
 public:
  Lstm() = default;
  Lstm(int input, int hidden, bool reverse, std::mt19937_64& rng);

  Var operator()(const Var& x) const { return lstm(x, w_ih_, w_hh_, bias_, reverse_); }
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Var w_ih_;
  Var w_hh_;
  Var bias_;
  bool reverse_ = false;
};

// Forward and backward LSTMs over the same input, outputs concatenated.
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(int input, int hidden, std::mt19937_64& rng);

  Var operator()(const Var& x) const { return concat_last(forward_(x), backward_(x)); }
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Lstm forward_;
  Lstm backward_;
};

}  // namespace stackkd::nn
