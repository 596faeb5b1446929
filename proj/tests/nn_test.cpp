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
#include "stackkd/nn/ops.hpp"
#include "stackkd/nn/optim.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace stackkd::nn {
namespace {

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : t.values()) v = n(rng);
  return t;
}

// Checks d(sum(out * weights))/d(input) against central differences for every
// entry of every input.
void check_gradients(const std::function<Var(std::vector<Var>&)>& op, std::vector<Tensor> inputs,
                     double tol = 1e-6) {
  std::mt19937_64 rng(99);
  std::vector<Var> vars;
  for (auto& t : inputs) vars.emplace_back(t, true);
  Var out = op(vars);
  const Tensor w = random_tensor(out.shape(), rng);
  backward(out, w);

  auto objective = [&](std::vector<Tensor> xs) {
    NoGradGuard guard;
    std::vector<Var> v;
    for (auto& t : xs) v.emplace_back(t, false);
    const Var o = op(v);
    double s = 0.0;
    for (std::size_t i = 0; i < o.value().size(); ++i) s += o.value()[i] * w[i];
    return s;
  };
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    ASSERT_TRUE(vars[k].has_grad());
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto up = inputs, down = inputs;
      up[k][i] += 1e-5;
      down[k][i] -= 1e-5;
      const double fd = (objective(up) - objective(down)) / 2e-5;
      EXPECT_NEAR(vars[k].grad()[i], fd, tol * std::max(1.0, std::abs(fd))) << "input " << k << " entry " << i;
    }
  }
}

TEST(Ops, Conv2dGradient) {
  std::mt19937_64 rng(1);
  check_gradients([](std::vector<Var>& v) { return conv2d(v[0], v[1], v[2], 1, 1); },
                  {random_tensor({2, 2, 5, 4}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)});
}

TEST(Ops, StridedConvGradient) {
  std::mt19937_64 rng(2);
  check_gradients([](std::vector<Var>& v) { return conv2d(v[0], v[1], Var(), 2, 0); },
                  {random_tensor({1, 2, 6, 5}, rng), random_tensor({2, 2, 2, 2}, rng)});
}

TEST(Ops, BatchNormTrainingGradient) {
  std::mt19937_64 rng(3);
  check_gradients(
      [](std::vector<Var>& v) {
        BatchNormStats stats{Tensor({2}, 0.0), Tensor({2}, 1.0)};
        return batch_norm_training(v[0], v[1], v[2], stats);
      },
      {random_tensor({3, 2, 2, 3}, rng), random_tensor({2}, rng), random_tensor({2}, rng)});
}

TEST(Ops, PoolingAndActivationGradients) {
  std::mt19937_64 rng(4);
  check_gradients([](std::vector<Var>& v) { return max_pool2d(relu(v[0]), 2, 1, 2, 1); },
                  {random_tensor({2, 2, 4, 3}, rng)});
  check_gradients([](std::vector<Var>& v) { return adaptive_avg_pool_width(v[0], 3); }, {random_tensor({1, 2, 1, 7}, rng)});
  check_gradients([](std::vector<Var>& v) { return global_avg_pool(v[0]); }, {random_tensor({2, 3, 2, 2}, rng)});
}

TEST(Ops, LinearAndShapeGradients) {
  std::mt19937_64 rng(5);
  check_gradients([](std::vector<Var>& v) { return linear(flatten(v[0]), v[1], v[2]); },
                  {random_tensor({2, 2, 3}, rng), random_tensor({4, 6}, rng), random_tensor({4}, rng)});
  check_gradients([](std::vector<Var>& v) { return columns_to_sequence(v[0]); }, {random_tensor({2, 3, 1, 4}, rng)});
  check_gradients([](std::vector<Var>& v) { return add(v[0], v[1]); }, {random_tensor({3, 2}, rng), random_tensor({3, 2}, rng)});
  check_gradients([](std::vector<Var>& v) { return concat_last(v[0], v[1]); },
                  {random_tensor({2, 3, 2}, rng), random_tensor({2, 3, 1}, rng)});
}

TEST(Ops, LstmGradientBothDirections) {
  std::mt19937_64 rng(6);
  for (bool reverse : {false, true})
    check_gradients([reverse](std::vector<Var>& v) { return lstm(v[0], v[1], v[2], v[3], reverse); },
                    {random_tensor({4, 2, 3}, rng), random_tensor({8, 3}, rng, 0.5), random_tensor({8, 2}, rng, 0.5),
                     random_tensor({8}, rng, 0.5)});
}

TEST(Ops, MaxPoolTiesPickFirst) {
  Var x(Tensor({1, 1, 2, 2}, {1.0, 1.0, 1.0, 1.0}), true);
  Var y = max_pool2d(x, 2, 2, 2, 2);
  backward(y, Tensor({1, 1, 1, 1}, 1.0));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1] + x.grad()[2] + x.grad()[3], 0.0);
}

TEST(Ops, ShapeErrors) {
  std::mt19937_64 rng(7);
  Var x(random_tensor({1, 2, 4, 4}, rng));
  Var w(random_tensor({3, 1, 3, 3}, rng));
  EXPECT_THROW(conv2d(x, w, Var(), 1, 1), Error);
  EXPECT_THROW(add(Var(Tensor({2})), Var(Tensor({3}))), Error);
}

TEST(Tape, NoGradGuardRecordsNothing) {
  Var a(Tensor({2}, 1.0), true);
  NoGradGuard guard;
  Var b = relu(a);
  EXPECT_FALSE(b.requires_grad());
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Var a(Tensor({1}, 2.0), true);
  Var b = add(a, a);
  backward(b, Tensor({1}, 1.0));
  EXPECT_EQ(a.grad()[0], 2.0);
}

TEST(Optim, SgdStepMovesAgainstGradient) {
  Var p(Tensor({2}, {1.0, -1.0}), true);
  p.mutable_grad() = Tensor({2}, {0.5, -0.5});
  SgdMomentum opt({p}, 0.1, 0.0);
  opt.step();
  EXPECT_DOUBLE_EQ(p.value()[0], 0.95);
  EXPECT_DOUBLE_EQ(p.value()[1], -0.95);
}

TEST(Optim, AdamFirstStepIsLearningRate) {
  Var p(Tensor({1}, 0.0), true);
  p.mutable_grad() = Tensor({1}, 3.0);
  Adam opt({p}, 0.01);
  opt.step();
  EXPECT_NEAR(p.value()[0], -0.01, 1e-9);
}

TEST(Optim, ClipGradNorm) {
  Var p(Tensor({2}, 0.0), true);
  p.mutable_grad() = Tensor({2}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(clip_grad_norm({p}, 1.0), 5.0);
  EXPECT_NEAR(p.grad()[0], 0.6, 1e-12);
  EXPECT_NEAR(p.grad()[1], 0.8, 1e-12);
}

}  // namespace
}  // namespace stackkd::nn
