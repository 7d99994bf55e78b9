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

#include "labeling/labels.hpp"

#include <string>

#include "common/error.hpp"

namespace partscreen::labeling {

LabelMatrix::LabelMatrix(std::size_t rows, std::size_t tasks,
                         std::vector<std::int8_t> values)
    : rows_(rows), tasks_(tasks), values_(std::move(values)) {
  require(values_.size() == rows_ * tasks_, ErrorCode::kShape,
          "label matrix size mismatch");
  for (auto v : values_)
    if (v != kPositive && v != kNegative && v != kUnknown)
      fail(ErrorCode::kInvalidArgument,
           "label value " + std::to_string(int(v)) + " outside {1, 0, -1}");
}

LabelMatrix LabelMatrix::unknown(std::size_t rows, std::size_t tasks) {
  return LabelMatrix(rows, tasks, std::vector<std::int8_t>(rows * tasks, kUnknown));
}

std::vector<double> LabelMatrix::indicator() const {
  std::vector<double> d(values_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = values_[i] != kUnknown ? 1.0 : 0.0;
  return d;
}

double LabelMatrix::indicator_count() const {
  double n = 0.0;
  for (auto v : values_) n += v != kUnknown ? 1.0 : 0.0;
  return n;
}

LabelMatrix LabelMatrix::slice(std::size_t begin, std::size_t count) const {
  require(begin + count <= rows_, ErrorCode::kShape, "label slice out of range");
  return LabelMatrix(count, tasks_,
                     std::vector<std::int8_t>(values_.begin() + begin * tasks_,
                                              values_.begin() + (begin + count) * tasks_));
}

namespace {

void check_tau(double tau) {
  require(tau > 0.5 && tau < 1.0, ErrorCode::kInvalidArgument,
          "pseudo-label threshold tau must lie in (0.5, 1), got " +
              std::to_string(tau));
}

std::int8_t threshold(double p, bool known, double tau) {
  if (known) return kUnknown;
  if (p > tau) return kPositive;
  if (p < 1.0 - tau) return kNegative;
  return kUnknown;
}

}  // namespace

PseudoLabels generate_pseudo_labels(std::span<const double> probs,
                                    const PartialLabels& labels, double tau) {
  check_tau(tau);
  require(probs.size() == labels.values().size(), ErrorCode::kShape,
          "probabilities and labels differ in size");
  std::vector<std::int8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    require(probs[i] >= 0.0 && probs[i] <= 1.0, ErrorCode::kInvalidArgument,
            "probability outside [0, 1]");
    out[i] = threshold(probs[i], labels.values()[i] != kUnknown, tau);
  }
  return PseudoLabels(labels.rows(), labels.tasks(), std::move(out));
}

std::vector<std::int8_t> generate_pseudo_labels(std::span<const double> probs,
                                                std::span<const double> delta,
                                                double tau) {
  check_tau(tau);
  require(probs.size() == delta.size(), ErrorCode::kShape,
          "probabilities and indicator differ in size");
  std::vector<std::int8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    require(probs[i] >= 0.0 && probs[i] <= 1.0, ErrorCode::kInvalidArgument,
            "probability outside [0, 1]");
    require(delta[i] == 0.0 || delta[i] == 1.0, ErrorCode::kInvalidArgument,
            "indicator entries must be 0 or 1");
    out[i] = threshold(probs[i], delta[i] == 1.0, tau);
  }
  return out;
}

}  // namespace partscreen::labeling
