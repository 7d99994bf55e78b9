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
#include "labeling/labels.hpp"
#include "losses/losses.hpp"
#include "oracles.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"

namespace partscreen::losses {
namespace {

using labeling::LabelMatrix;

Tensor probs(std::size_t b, std::size_t t, std::vector<double> v) {
  return Tensor::from_data({b, t}, std::move(v));
}

LabelMatrix random_labels(Rng& rng, std::size_t b, std::size_t t) {
  std::vector<std::int8_t> y(b * t);
  for (auto& v : y) v = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
  return LabelMatrix(b, t, y);
}

TEST(PartialBceTest, IgnoresUnknownEntries) {
  LabelMatrix y(1, 3, {1, -1, 0});
  auto l = partial_bce(probs(1, 3, {0.5, 0.9, 0.5}), y);
  EXPECT_NEAR(l.item(), std::log(2.0), 1e-12);
}

TEST(PartialBceTest, PerfectPredictionsNearZero) {
  LabelMatrix y(1, 4, {1, 0, 1, 0});
  auto l = partial_bce(probs(1, 4, {1.0, 0.0, 1.0, 0.0}), y);
  EXPECT_LE(l.item(), 1e-6 * 4);
  EXPECT_GE(l.item(), 0.0);
}

TEST(PartialBceTest, EmptyMaskGivesZeroAndZeroGradient) {
  auto p = Tensor::from_data({2, 2}, {0.3, 0.6, 0.2, 0.9}, true);
  auto l = partial_bce(p, LabelMatrix::unknown(2, 2));
  EXPECT_EQ(l.item(), 0.0);
  l.backward();
  for (double g : p.grad()) EXPECT_EQ(g, 0.0);
}

TEST(PartialBceTest, BatchMaskCount) {
  // Two samples, three known entries in total: average over all three.
  LabelMatrix y(2, 2, {1, -1, 0, 1});
  auto l = partial_bce(probs(2, 2, {0.8, 0.5, 0.3, 0.6}), y);
  const double ref = -(std::log(0.8) + std::log(0.7) + std::log(0.6)) / 3.0;
  EXPECT_NEAR(l.item(), ref, 1e-12);
}

TEST(PartialBceTest, RejectsShapeMismatch) {
  EXPECT_THROW(partial_bce(probs(1, 2, {0.5, 0.5}), LabelMatrix(1, 3, {1, 0, 1})), Error);
}

TEST(S2ClassificationTest, ReducesToComponents) {
  LossWeights w;
  auto p = probs(1, 3, {0.7, 0.2, 0.99});
  LabelMatrix known(1, 3, {1, 0, -1});
  LabelMatrix pseudo(1, 3, {-1, -1, 1});
  auto none = LabelMatrix::unknown(1, 3);
  EXPECT_DOUBLE_EQ(s2_classification_loss(p, known, none, w).item(),
                   partial_bce(p, known).item());
  EXPECT_DOUBLE_EQ(s2_classification_loss(p, none, pseudo, w).item(),
                   0.6 * partial_bce(p, pseudo, MaskSource::kPseudo).item());
  const double ref = -(std::log(0.7) + std::log(0.8)) / 2.0 - 0.6 * std::log(0.99);
  EXPECT_NEAR(s2_classification_loss(p, known, pseudo, w).item(), ref, 1e-7);
}

TEST(MmdTest, ClosedFormValues) {
  auto kernel = KernelConfig::fixed(0.5);
  auto f = Tensor::from_data({1, 1, 2}, {0.3, -0.2});
  EXPECT_EQ(mmd_loss(f, f, kernel).item(), 0.0);
  // |f - g|^2 = 2 h^2 = 0.5
  auto g = Tensor::from_data({1, 1, 2}, {0.3 + 0.5, -0.2 + 0.5});
  EXPECT_NEAR(mmd_loss(f, g, kernel).item(), 2.0 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(mmd_loss(f, g, kernel).item(), 1.264241, 1e-6);
}

TEST(MmdTest, BoundedAndSymmetricInValues) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape s{1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(4)};
    auto a = Tensor::from_data(s, oracle::random_vector(rng, numel_of(s), -3, 3));
    auto b = Tensor::from_data(s, oracle::random_vector(rng, numel_of(s), -3, 3));
    for (auto k : {KernelConfig::fixed(rng.uniform(0.1, 2.0)), KernelConfig::median_heuristic()}) {
      const double ab = mmd_loss(a, b, k).item(), ba = mmd_loss(b, a, k).item();
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 2.0);
      EXPECT_NEAR(ab, ba, 1e-12);
    }
  }
}

TEST(MmdTest, GradientReachesStudentOnly) {
  Rng rng(3);
  auto t = Tensor::from_data({2, 2, 3}, oracle::random_vector(rng, 12), true);
  auto s = Tensor::from_data({2, 2, 3}, oracle::random_vector(rng, 12), true);
  auto l = mmd_loss(t, s, KernelConfig::median_heuristic());
  l.backward();
  EXPECT_FALSE(t.has_grad());
  EXPECT_TRUE(s.has_grad());
}

TEST(MmdTest, MedianHeuristicFloor) {
  auto f = Tensor::zeros({2, 1, 3});
  EXPECT_DOUBLE_EQ(KernelConfig::median_heuristic().resolve(f, f), 1e-3);
  EXPECT_THROW(KernelConfig::fixed(0.0).resolve(f, f), Error);
}

TEST(KlKnownTest, ScalarValues) {
  LabelMatrix y(1, 1, {1});
  EXPECT_NEAR(kl_known(probs(1, 1, {0.8}), probs(1, 1, {0.8}), y).item(), 0.0, 1e-15);
  EXPECT_NEAR(kl_known(probs(1, 1, {0.8}), probs(1, 1, {0.4}), y).item(), 0.8 * std::log(2.0),
              1e-12);
  EXPECT_NEAR(kl_known(probs(1, 1, {0.8}), probs(1, 1, {0.4}), y).item(), 0.554518, 1e-6);
  EXPECT_EQ(kl_known(probs(1, 2, {0.8, 0.1}), probs(1, 2, {0.4, 0.7}),
                     LabelMatrix::unknown(1, 2)).item(),
            0.0);
}

TEST(KlKnownTest, OneSidedFormCanBeNegative) {
  // The single-term divergence is not a proper KL: a student more confident
  // than the teacher gives a negative value.
  LabelMatrix y(1, 1, {0});
  const double v = kl_known(probs(1, 1, {0.5}), probs(1, 1, {0.9}), y).item();
  EXPECT_NEAR(v, 0.5 * std::log(0.5 / 0.9), 1e-12);
  EXPECT_LT(v, 0.0);
}

TEST(AdversarialLossTest, ScalarValues) {
  LabelMatrix y(1, 3, {1, 1, 0});
  EXPECT_NEAR(adversarial_loss(y, probs(1, 3, {1.0, 1.0, 0.3})).item(), 0.0, 1e-6);
  LabelMatrix single(1, 1, {1});
  EXPECT_NEAR(adversarial_loss(single, probs(1, 1, {0.5})).item(), std::log(0.5), 1e-12);
  EXPECT_NEAR(adversarial_loss(single, probs(1, 1, {0.5})).item(), -0.693147, 1e-6);
  LabelMatrix negatives(1, 2, {0, 0});
  EXPECT_EQ(adversarial_loss(negatives, probs(1, 2, {0.2, 0.9})).item(), 0.0);
}

TEST(TotalLossTest, PlainSum) {
  auto z = Tensor::scalar(0.0);
  EXPECT_EQ(total_loss(z, z, z).item(), 0.0);
  EXPECT_EQ(total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3)).item(), 6.0);
  EXPECT_THROW(total_loss(Tensor::scalar(NAN), z, z), Error);
  LossWeights w;
  EXPECT_NEAR(s2_total(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3), w).item(),
              1 + 0.05 * 2 + 3, 1e-15);
  w.lambda2 = -1;
  EXPECT_THROW(w.validate(), Error);
}

TEST(LossPropertyTest, SignsOverRandomBatches) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t b = 1 + rng.below(4), t = 1 + rng.below(4);
    auto y = random_labels(rng, b, t);
    auto p = probs(b, t, oracle::random_vector(rng, b * t, 0.0, 1.0));
    EXPECT_GE(partial_bce(p, y).item(), 0.0);
    EXPECT_LE(adversarial_loss(y, p).item(), 0.0);
  }
}

TEST(LossGradientTest, EveryLossPassesGradientCheck) {
  Rng rng(5);
  const std::size_t b = 3, t = 4, c = 3;
  LabelMatrix y(b, t, {1, 0, -1, 1, -1, -1, 0, 1, 1, 1, 0, -1});
  LabelMatrix pseudo(b, t, {-1, -1, 1, -1, 0, 1, -1, -1, -1, -1, -1, 0});
  auto p = probs(b, t, oracle::random_vector(rng, b * t, 0.05, 0.95));
  auto teacher = probs(b, t, oracle::random_vector(rng, b * t, 0.05, 0.95));
  auto ft = Tensor::from_data({b, t, c}, oracle::random_vector(rng, b * t * c));
  auto fs = Tensor::from_data({b, t, c}, oracle::random_vector(rng, b * t * c));
  const Tensor teacher_const = teacher.clone();
  LossWeights w;
  const auto kernel = KernelConfig::fixed(0.8);
  auto check = [](const ScalarFn& f, std::vector<Tensor> in) {
    return check_gradients(f, std::move(in)).max_rel_error;
  };
  EXPECT_LT(check([&](const auto& in) { return partial_bce(in[0], y); }, {p}), 1e-4);
  EXPECT_LT(check([&](const auto& in) { return s2_classification_loss(in[0], y, pseudo, w); }, {p}),
            1e-4);
  EXPECT_LT(check([&](const auto& in) { return mmd_loss(ft, in[0], kernel); }, {fs}), 1e-4);
  EXPECT_LT(check([&](const auto& in) { return kl_known(teacher, in[0], y); }, {p}), 1e-4);
  EXPECT_LT(check([&](const auto& in) { return adversarial_loss(y, in[0]); }, {p}), 1e-4);
  EXPECT_LT(check(
                [&](const auto& in) {
                  return total_loss(partial_bce(in[0], y),
                                    partial_bce(in[1], pseudo, MaskSource::kPseudo),
                                    s2_total(s2_classification_loss(in[1], y, pseudo, w),
                                             mmd_loss(ft, in[2], kernel), kl_known(teacher_const, in[1], y),
                                             w));
                },
                {teacher, p, fs}),
            1e-4);
}

TEST(MaskingInvarianceTest, UnsupervisedPositionsAreInert) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = 2, t = 3;
    auto y = random_labels(rng, b, t);
    std::vector<std::int8_t> ps(b * t);
    for (std::size_t i = 0; i < ps.size(); ++i)
      ps[i] = y.values()[i] != labeling::kUnknown
                  ? labeling::kUnknown
                  : static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
    LabelMatrix pseudo(b, t, ps);
    auto logits = Tensor::from_data({b, t}, oracle::random_vector(rng, b * t, -2, 2), true);
    auto teacher = probs(b, t, oracle::random_vector(rng, b * t, 0.1, 0.9));
    LossWeights w;
    auto loss_at = [&](const Tensor& z) {
      auto pr = ops::sigmoid(z);
      return total_loss(partial_bce(pr, y), partial_bce(pr, pseudo, MaskSource::kPseudo),
                        s2_total(s2_classification_loss(pr, y, pseudo, w),
                                 Tensor::scalar(0.0), kl_known(teacher, pr, y), w));
    };
    auto l = loss_at(logits);
    l.backward();
    auto moved = logits.detach();
    for (std::size_t i = 0; i < b * t; ++i) {
      const bool inert = y.values()[i] == labeling::kUnknown && ps[i] == labeling::kUnknown;
      if (!inert) continue;
      EXPECT_EQ(logits.grad()[i], 0.0);
      moved.mutable_data()[i] += 1.7;
    }
    EXPECT_EQ(loss_at(moved).item(), l.item());
  }
}

}  // namespace
}  // namespace partscreen::losses
