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

// Connectionist Temporal Classification: log-space forward-backward loss and
// best-path decoding. The blank is the last class.

#pragma once

#include "stackkd/common.hpp"

#include <span>
#include <vector>

namespace stackkd {

struct CtcResult {
  double loss = 0.0;  // -log P(target | inputs); +inf when infeasible
  Matrix grad;        // d loss / d input, same shape as the input
  bool feasible = true;
};

// Minimum number of frames that can emit `target` (repeats need a blank).
int ctc_min_frames(std::span<const int> target);

// `log_probs` is n_seq x num_classes with normalized rows; `blank` must be
// num_classes - 1 and `target` non-empty with indices in [0, blank). The
// gradient is with respect to the log-probability entries. An infeasible
// target yields +inf, feasible = false and a zero gradient.
CtcResult ctc_loss(const Matrix& log_probs, std::span<const int> target, int blank);

// Applies log-softmax to each row first; the gradient is with respect to the
// raw logits.
CtcResult ctc_loss_from_logits(const Matrix& logits, std::span<const int> target, int blank);

// Per-row argmax (ties to the lower index), merge repeats, drop blanks.
std::vector<int> ctc_greedy_decode(const Matrix& probs, int blank);

}  // namespace stackkd
