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


#ifndef PARTSCREEN_METRICS_METRICS_HPP_
#define PARTSCREEN_METRICS_METRICS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace partscreen::metrics {

struct BinaryCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

BinaryCounts count_binary(std::span<const int> preds, std::span<const int> labels);

enum class FMode { kMacro, kPositiveOnly };

// Mean of the positive- and negative-class F1 (or positive F1 only). An F1
// with a zero denominator counts as 0.
double macro_f(std::span<const int> preds, std::span<const int> labels,
               FMode mode = FMode::kMacro);

// Quadratic weighted kappa over `levels` ordinal values; 0 when the expected
// disagreement is 0.
double qwk(std::span<const int> preds, std::span<const int> labels, int levels);

// 1 where p >= threshold.
std::vector<int> threshold(std::span<const double> probs, double t = 0.5);

struct TaskScore {
  std::string dataset;
  std::size_t task = 0;
  double f = 0.0;
  double qwk = 0.0;
};

struct Summary {
  double mF = 0.0;
  double mQWK = 0.0;
  // Per-task average across datasets.
  std::map<std::size_t, double> task_f, task_qwk;
};

// Averages each task over the datasets that score it, then averages tasks.
Summary aggregate(const std::vector<TaskScore>& scores);

}  // namespace partscreen::metrics

#endif  // PARTSCREEN_METRICS_METRICS_HPP_
