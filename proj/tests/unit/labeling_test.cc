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

#include "common/error.hpp"
#include "common/random.hpp"
#include "labeling/labels.hpp"

namespace partscreen::labeling {
namespace {

TEST(PseudoLabelTest, WorkedExamples) {
  const double tau = 0.95;
  auto one = [&](double p, double d) {
    return generate_pseudo_labels(std::vector<double>{p}, std::vector<double>{d}, tau)[0];
  };
  EXPECT_EQ(one(0.96, 0.0), kPositive);
  EXPECT_EQ(one(0.50, 0.0), kUnknown);
  EXPECT_EQ(one(0.03, 0.0), kNegative);
  EXPECT_EQ(one(0.99, 1.0), kUnknown);
}

TEST(PseudoLabelTest, ExhaustiveTruthTable) {
  const double tau = 0.95, eps = 1e-9;
  const double probs[] = {0.0, 1.0 - tau - eps, 1.0 - tau, 0.5, tau, tau + eps, 1.0};
  const std::int8_t unknown_case[] = {kNegative, kNegative, kUnknown, kUnknown,
                                      kUnknown, kPositive, kPositive};
  for (int d = 0; d <= 1; ++d)
    for (int k = 0; k < 7; ++k) {
      const auto out = generate_pseudo_labels(std::vector<double>{probs[k]},
                                              std::vector<double>{double(d)}, tau);
      EXPECT_EQ(out[0], d == 1 ? kUnknown : unknown_case[k]) << "d=" << d << " p=" << probs[k];
    }
}

TEST(PseudoLabelTest, NeverOverlapsKnownIndicator) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.below(4), tasks = 1 + rng.below(5);
    std::vector<std::int8_t> y(rows * tasks);
    std::vector<double> p(rows * tasks);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
      p[i] = rng.bernoulli(0.5) ? rng.uniform() : (rng.bernoulli(0.5) ? 0.999 : 0.001);
    }
    LabelMatrix labels(rows, tasks, y);
    const double tau = rng.uniform(0.51, 0.99);
    auto pseudo = generate_pseudo_labels(p, labels, tau);
    const auto delta = labels.indicator(), zeta = pseudo.indicator();
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(delta[i] * zeta[i], 0.0);
  }
}

TEST(PseudoLabelTest, RejectsBadThreshold) {
  std::vector<double> p{0.5}, d{0.0};
  EXPECT_THROW(generate_pseudo_labels(p, d, 0.5), Error);
  EXPECT_THROW(generate_pseudo_labels(p, d, 0.3), Error);
  EXPECT_THROW(generate_pseudo_labels(p, d, 1.0), Error);
  EXPECT_THROW(generate_pseudo_labels(std::vector<double>{1.5}, d, 0.9), Error);
}

TEST(LabelMatrixTest, IndicatorAndValidation) {
  LabelMatrix m(2, 3, {1, -1, 0, -1, -1, 1});
  EXPECT_EQ(m.indicator(), (std::vector<double>{1, 0, 1, 0, 0, 1}));
  EXPECT_EQ(m.indicator_count(), 3.0);
  EXPECT_EQ(m.slice(1, 1).at(0, 2), kPositive);
  EXPECT_THROW(LabelMatrix(1, 2, {1, 2}), Error);
  EXPECT_THROW(LabelMatrix(1, 2, {1}), Error);
}

}  // namespace
}  // namespace partscreen::labeling
