// Copyright 2026 The partscreen Authors. All Rights Reserved.
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


#include <gtest/gtest.h>

#include <cmath>

#include "common/error.hpp"
#include "common/random.hpp"
#include "oracles.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "tensor/serialize.hpp"
#include "tensor/tensor.hpp"

#include <sstream>

namespace partscreen {
namespace {

Tensor random_tensor(Rng& rng, const Shape& shape, double lo = -1.0,
                     double hi = 1.0) {
  return Tensor::from_data(shape, oracle::random_vector(rng, numel_of(shape), lo, hi));
}

TEST(TensorTest, ShapeMustMatchData) {
  EXPECT_THROW(Tensor::from_data({2, 3}, std::vector<double>(5)), Error);
  auto t = Tensor::from_data({2, 3}, std::vector<double>(6, 1.5));
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2u);
}

TEST(TensorTest, SumOfSquaresGradientIsExact) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = random_tensor(rng, {3, 4});
    auto report = check_gradients(
        [](const std::vector<Tensor>& in) { return ops::sum(ops::square(in[0])); },
        {x});
    EXPECT_LT(report.max_rel_error, 1e-7);
  }
}

TEST(TensorTest, BackwardTwiceOnSameTraceRejected) {
  auto x = Tensor::from_data({2}, {1.0, 2.0}, true);
  auto y = ops::sum(ops::square(x));
  y.backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 4.0);
  EXPECT_THROW(y.backward(), Error);
}

TEST(TensorTest, NoGradGuardRecordsNothing) {
  auto x = Tensor::from_data({2}, {1.0, 2.0}, true);
  Tensor y;
  {
    NoGradGuard guard;
    y = ops::sum(ops::square(x));
  }
  EXPECT_FALSE(y.requires_grad());
}

TEST(TensorTest, BackwardIsDeterministic) {
  Rng rng(11);
  auto base = random_tensor(rng, {2, 3, 6, 6});
  auto w = random_tensor(rng, {4, 3, 3, 3});
  auto b = random_tensor(rng, {4});
  auto run = [&] {
    auto x = base.clone();
    x.set_requires_grad(true);
    auto y = ops::sum(ops::silu(ops::conv2d(x, w, b, 2, 1)));
    y.backward();
    return std::vector<double>(x.grad().begin(), x.grad().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(TensorTest, ElementwiseOpsPassGradientCheck) {
  Rng rng(5);
  auto a = random_tensor(rng, {2, 4});
  auto b = random_tensor(rng, {2, 4});
  auto wts = oracle::random_vector(rng, 8);
  using Fn = Tensor (*)(const Tensor&);
  for (Fn fn : {static_cast<Fn>(ops::exp), static_cast<Fn>(ops::tanh),
                static_cast<Fn>(ops::sigmoid), static_cast<Fn>(ops::silu),
                static_cast<Fn>(ops::softplus), static_cast<Fn>(ops::square)}) {
    auto r = check_gradients(
        [&](const std::vector<Tensor>& in) { return ops::dot_const(fn(in[0]), wts); },
        {a});
    EXPECT_LT(r.max_rel_error, 1e-4);
  }
  auto r = check_gradients(
      [&](const std::vector<Tensor>& in) {
        return ops::dot_const(
            ops::add(ops::mul(in[0], in[1]), ops::scale(ops::sub(in[0], in[1]), 0.3)),
            wts);
      },
      {a, b});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(TensorTest, MatmulSoftmaxConvPassGradientCheck) {
  Rng rng(7);
  auto a = random_tensor(rng, {3, 4});
  auto b = random_tensor(rng, {4, 5});
  auto w15 = oracle::random_vector(rng, 15);
  auto r = check_gradients(
      [&](const std::vector<Tensor>& in) {
        return ops::dot_const(ops::softmax_lastdim(ops::matmul(in[0], in[1])), w15);
      },
      {a, b});
  EXPECT_LT(r.max_rel_error, 1e-4);

  auto x = random_tensor(rng, {2, 2, 5, 5});
  auto k = random_tensor(rng, {3, 2, 3, 3});
  auto bias = random_tensor(rng, {3});
  auto wc = oracle::random_vector(rng, 2 * 3 * 3 * 3);
  r = check_gradients(
      [&](const std::vector<Tensor>& in) {
        return ops::dot_const(ops::conv2d(in[0], in[1], in[2], 2, 1), wc);
      },
      {x, k, bias});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(TensorTest, ConvMatchesDirectSummation) {
  Rng rng(9);
  auto x = random_tensor(rng, {1, 2, 5, 4});
  auto k = random_tensor(rng, {2, 2, 3, 3});
  auto bias = random_tensor(rng, {2});
  auto y = ops::conv2d(x, k, bias, 2, 1);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 3, 2}));
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        double acc = bias.at(o);
        for (std::size_t c = 0; c < 2; ++c)
          for (int di = 0; di < 3; ++di)
            for (int dj = 0; dj < 3; ++dj) {
              const int yi = int(i) * 2 - 1 + di, xj = int(j) * 2 - 1 + dj;
              if (yi < 0 || yi >= 5 || xj < 0 || xj >= 4) continue;
              acc += x.at(c * 20 + yi * 4 + xj) * k.at(((o * 2 + c) * 3 + di) * 3 + dj);
            }
        EXPECT_NEAR(y.at((o * 3 + i) * 2 + j), acc, 1e-12);
      }
}

TEST(GradCheckTest, RejectsNondeterministicFunction) {
  int calls = 0;
  auto x = Tensor::from_data({2}, {0.1, 0.2});
  EXPECT_THROW(check_gradients(
                   [&](const std::vector<Tensor>& in) {
                     ++calls;
                     return ops::scale(ops::sum(in[0]), 1.0 + calls);
                   },
                   {x}),
               Error);
}

TEST(GradCheckTest, RestoresInputs) {
  auto x = Tensor::from_data({3}, {0.1, -0.2, 0.3});
  const std::vector<double> before(x.data().begin(), x.data().end());
  check_gradients(
      [](const std::vector<Tensor>& in) { return ops::sum(ops::exp(in[0])); }, {x});
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()), before);
  EXPECT_FALSE(x.requires_grad());
}

TEST(SerializeTest, RoundTripsAtFloatPrecision) {
  Rng rng(2);
  auto t = random_tensor(rng, {2, 3, 4}, -5.0, 5.0);
  std::stringstream ss;
  write_tensor(ss, t);
  EXPECT_EQ(ss.str().size(), 8u + 3 * 8u + 24 * 4u);
  auto back = read_tensor(ss);
  ASSERT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i)
    EXPECT_EQ(back.at(i), static_cast<double>(static_cast<float>(t.at(i))));
}

TEST(SerializeTest, LittleEndianLayout) {
  auto t = Tensor::from_data({1}, {1.0});
  std::stringstream ss;
  write_tensor(ss, t);
  const std::string s = ss.str();
  ASSERT_EQ(s.size(), 8u + 8u + 4u);
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 1);
  EXPECT_EQ(static_cast<unsigned char>(s[8]), 1);
  // 1.0f = 0x3f800000
  EXPECT_EQ(static_cast<unsigned char>(s[16 + 3]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(s[16 + 2]), 0x80);
}

TEST(SerializeTest, TruncatedStreamRejected) {
  std::stringstream ss(std::string("\x02\x00\x00", 3));
  EXPECT_THROW(read_tensor(ss), Error);
}

}  // namespace
}  // namespace partscreen
