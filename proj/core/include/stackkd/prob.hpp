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

// Numerically stable softmax helpers over vectors and matrix rows.

#pragma once

#include "stackkd/common.hpp"

#include <span>
#include <vector>

namespace stackkd {

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);

// Shannon entropy in nats; 0 * log 0 counts as 0.
double entropy(std::span<const double> probs);

// Lowest index among maximal entries.
std::size_t argmax(std::span<const double> values);

}  // namespace stackkd
