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

// Differentiable operations on Var. Image tensors are NCHW; sequence tensors
// are [T, N, F].

#pragma once

#include "stackkd/nn/tensor.hpp"

namespace stackkd::nn {

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

struct BatchNormStats {
  Tensor running_mean;
  Tensor running_var;
};

// Normalizes with batch statistics and folds them into `stats`.
Var batch_norm_training(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats,
                        double momentum = 0.1, double eps = 1e-5);
// Normalizes with the running statistics.
Var batch_norm_inference(const Var& x, const Var& gamma, const Var& beta, const BatchNormStats& stats,
                         double eps = 1e-5);

Var relu(const Var& x);
Var max_pool2d(const Var& x, int kernel_h, int kernel_w, int stride_h, int stride_w);

// Averages the width axis into `out_width` bins (floor/ceil bin edges).
Var adaptive_avg_pool_width(const Var& x, int out_width);
Var global_avg_pool(const Var& x);  // [N,C,H,W] -> [N,C]

Var add(const Var& a, const Var& b);
Var linear(const Var& x, const Var& weight, const Var& bias);  // [N,I] x [O,I] -> [N,O]
Var reshape(const Var& x, std::vector<int> shape);
Var flatten(const Var& x);  // [N, ...] -> [N, rest]

// [N, C, 1, W] -> [W, N, C]
Var columns_to_sequence(const Var& x);

// Single-direction LSTM over [T, N, I] with gate order (input, forget, cell,
// output). `reverse` runs from t = T-1 down to 0; output keeps time order.
Var lstm(const Var& x, const Var& w_ih, const Var& w_hh, const Var& bias, bool reverse);

Var concat_last(const Var& a, const Var& b);  // [T,N,A] ++ [T,N,B] -> [T,N,A+B]

}  // namespace stackkd::nn
