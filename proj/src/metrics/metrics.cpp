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


#include "metrics/metrics.hpp"

#include "common/error.hpp"

namespace partscreen::metrics {

BinaryCounts count_binary(std::span<const int> preds, std::span<const int> labels) {
  require(preds.size() == labels.size() && !preds.empty(), ErrorCode::kShape,
          "predictions and labels must be non-empty and equally long");
  BinaryCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require((preds[i] == 0 || preds[i] == 1) && (labels[i] == 0 || labels[i] == 1),
            ErrorCode::kInvalidArgument, "binary metrics need values in {0, 1}");
    if (labels[i] == 1)
      (preds[i] == 1 ? c.tp : c.fn)++;
    else
      (preds[i] == 1 ? c.fp : c.tn)++;
  }
  return c;
}

namespace {

double f1(long tp, long fp, long fn) {
  const long d = 2 * tp + fp + fn;
  return d == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(d);
}

}  // namespace

double macro_f(std::span<const int> preds, std::span<const int> labels, FMode mode) {
  const auto c = count_binary(preds, labels);
  const double pos = f1(c.tp, c.fp, c.fn);
  if (mode == FMode::kPositiveOnly) return pos;
  // Negative class: roles of the counts swap.
  const double neg = f1(c.tn, c.fn, c.fp);
  return 0.5 * (pos + neg);
}

double qwk(std::span<const int> preds, std::span<const int> labels, int levels) {
  require(levels >= 1, ErrorCode::kInvalidArgument, "qwk needs at least one level");
  require(preds.size() == labels.size() && !preds.empty(), ErrorCode::kShape,
          "predictions and labels must be non-empty and equally long");
  const std::size_t L = static_cast<std::size_t>(levels);
  std::vector<double> observed(L * L, 0.0), hist_label(L, 0.0), hist_pred(L, 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(preds[i] >= 0 && preds[i] < levels && labels[i] >= 0 && labels[i] < levels,
            ErrorCode::kInvalidArgument, "qwk value outside [0, levels)");
    observed[labels[i] * L + preds[i]] += 1.0;
    hist_label[labels[i]] += 1.0;
    hist_pred[preds[i]] += 1.0;
  }
  if (levels == 1) return 0.0;
  const double n = static_cast<double>(preds.size());
  const double span = static_cast<double>((L - 1) * (L - 1));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / span;
      num += w * observed[i * L + j];
      den += w * hist_label[i] * hist_pred[j] / n;
    }
  return den == 0.0 ? 0.0 : 1.0 - num / den;
}

std::vector<int> threshold(std::span<const double> probs, double t) {
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= t ? 1 : 0;
  return out;
}

Summary aggregate(const std::vector<TaskScore>& scores) {
  require(!scores.empty(), ErrorCode::kInvalidArgument, "nothing to aggregate");
  std::map<std::size_t, std::pair<double, double>> sums;
  std::map<std::size_t, int> counts;
  for (const auto& s : scores) {
    sums[s.task].first += s.f;
    sums[s.task].second += s.qwk;
    ++counts[s.task];
  }
  Summary out;
  for (const auto& [task, sum] : sums) {
    out.task_f[task] = sum.first / counts[task];
    out.task_qwk[task] = sum.second / counts[task];
    out.mF += out.task_f[task];
    out.mQWK += out.task_qwk[task];
  }
  out.mF /= static_cast<double>(sums.size());
  out.mQWK /= static_cast<double>(sums.size());
  return out;
}

}  // namespace partscreen::metrics
