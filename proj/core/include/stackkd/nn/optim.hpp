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

#include "stackkd/nn/tensor.hpp"

#include <vector>

namespace stackkd::nn {

// Rescales gradients so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double clip_grad_norm(const std::vector<Var>& params, double max_norm);
void zero_grad(const std::vector<Var>& params);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step() = 0;
  void zero_grad() { nn::zero_grad(params_); }
  const std::vector<Var>& params() const noexcept { return params_; }

 protected:
  explicit Optimizer(std::vector<Var> params) : params_(std::move(params)) {}
  std::vector<Var> params_;
};

class SgdMomentum final : public Optimizer {
 public:
  SgdMomentum(std::vector<Var> params, double lr, double momentum = 0.9, double weight_decay = 0.0);
  void step() override;

 private:
  double lr_, momentum_, weight_decay_;
  std::vector<Tensor> velocity_;
};

class Adam final : public Optimizer {
 public:
  Adam(std::vector<Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step() override;

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace stackkd::nn
