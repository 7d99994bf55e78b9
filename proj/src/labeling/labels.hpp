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

#ifndef PARTSCREEN_LABELING_LABELS_HPP_
#define PARTSCREEN_LABELING_LABELS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace partscreen::labeling {

constexpr std::int8_t kPositive = 1;
constexpr std::int8_t kNegative = 0;
constexpr std::int8_t kUnknown = -1;

// Row-major [B, T] matrix of labels in {1, 0, -1}. Serves both ground-truth
// partial labels (indicator = known mask) and pseudo labels (indicator =
// pseudo-assigned mask).
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t tasks, std::vector<std::int8_t> values);
  static LabelMatrix unknown(std::size_t rows, std::size_t tasks);

  std::size_t rows() const { return rows_; }
  std::size_t tasks() const { return tasks_; }
  std::int8_t at(std::size_t b, std::size_t t) const { return values_[b * tasks_ + t]; }
  std::span<const std::int8_t> values() const { return values_; }
  std::span<const std::int8_t> row(std::size_t b) const {
    return std::span<const std::int8_t>(values_).subspan(b * tasks_, tasks_);
  }

  // 1 where the entry is 0 or 1.
  std::vector<double> indicator() const;
  double indicator_count() const;

  // Rows [begin, begin + count).
  LabelMatrix slice(std::size_t begin, std::size_t count) const;

 private:
  std::size_t rows_ = 0, tasks_ = 0;
  std::vector<std::int8_t> values_;
};

using PartialLabels = LabelMatrix;
using PseudoLabels = LabelMatrix;

// Thresholds detached teacher probabilities [B*T] into pseudo labels on
// unknown tasks only: 1 if p > tau, 0 if p < 1 - tau, -1 otherwise (and -1
// wherever the ground truth is known). Rejects tau <= 0.5 or tau >= 1.
PseudoLabels generate_pseudo_labels(std::span<const double> probs,
                                    const PartialLabels& labels, double tau);

// Single-sample form over explicit indicator values.
std::vector<std::int8_t> generate_pseudo_labels(std::span<const double> probs,
                                                std::span<const double> delta,
                                                double tau);

}  // namespace partscreen::labeling

#endif  // PARTSCREEN_LABELING_LABELS_HPP_
