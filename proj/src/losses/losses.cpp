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

#include "losses/losses.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace partscreen::losses {

using labeling::LabelMatrix;

namespace {

void check_probs(const Tensor& probs, const LabelMatrix& labels,
                 const char* what) {
  require(probs.rank() == 2 && probs.dim(0) == labels.rows() &&
              probs.dim(1) == labels.tasks(),
          ErrorCode::kShape,
          std::string(what) + ": probabilities " + shape_str(probs.shape()) +
              " do not match labels [" + std::to_string(labels.rows()) + "," +
              std::to_string(labels.tasks()) + "]");
}

struct Clamped {
  double value;
  bool active;  // derivative passes through
};

Clamped clamp_prob(double p) {
  if (p < kProbClamp) return {kProbClamp, false};
  if (p > 1.0 - kProbClamp) return {1.0 - kProbClamp, false};
  return {p, true};
}

}  // namespace

void LossWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3})
    require(std::isfinite(l) && l >= 0.0, ErrorCode::kInvalidArgument,
            "loss weights must be finite and non-negative");
}

double KernelConfig::resolve(const Tensor& teacher, const Tensor& student) const {
  if (bandwidth) {
    require(*bandwidth > 0.0 && std::isfinite(*bandwidth),
            ErrorCode::kInvalidArgument, "kernel bandwidth must be positive");
    return *bandwidth;
  }
  require(teacher.shape() == student.shape() && teacher.rank() >= 1,
          ErrorCode::kShape, "median heuristic: feature shapes differ");
  const std::size_t c = teacher.shape().back();
  const std::size_t n = teacher.numel() / c;
  const auto f = teacher.data(), g = student.data();
  std::vector<double> d;
  d.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        const double diff = f[i * c + k] - g[j * c + k];
        s += diff * diff;
      }
      d.push_back(std::sqrt(s));
    }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + mid);
    med = 0.5 * (med + lower);
  }
  return std::max(med, 1e-3);
}

Tensor partial_bce(const Tensor& probs, const LabelMatrix& labels,
                   MaskSource /*source*/) {
  check_probs(probs, labels, "partial_bce");
  const auto p = probs.data();
  std::vector<std::int8_t> y(labels.values().begin(), labels.values().end());
  const double count = labels.indicator_count();
  if (count == 0.0) return make_result({}, {0.0}, {probs}, [](detail::Node&) {});
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] == labeling::kUnknown) continue;
    const double pc = clamp_prob(p[i]).value;
    s += y[i] == labeling::kPositive ? std::log(pc) : std::log(1.0 - pc);
  }
  return make_result({}, {-s / count}, {probs},
                     [count, y = std::move(y)](detail::Node& self) {
                       auto* g = parent_grad(self, 0);
                       if (!g) return;
                       const auto& p = self.parents[0]->value;
                       const double up = self.grad[0] / count;
                       for (std::size_t i = 0; i < p.size(); ++i) {
                         if (y[i] == labeling::kUnknown) continue;
                         const auto c = clamp_prob(p[i]);
                         if (!c.active) continue;
                         (*g)[i] -= up * (y[i] == labeling::kPositive
                                              ? 1.0 / c.value
                                              : -1.0 / (1.0 - c.value));
                       }
                     });
}

Tensor s2_classification_loss(const Tensor& probs,
                              const labeling::PartialLabels& labels,
                              const labeling::PseudoLabels& pseudo,
                              const LossWeights& w) {
  w.validate();
  return ops::add(partial_bce(probs, labels, MaskSource::kKnown),
                  ops::scale(partial_bce(probs, pseudo, MaskSource::kPseudo),
                             w.lambda1));
}

Tensor mmd_loss(const Tensor& teacher_features, const Tensor& student_features,
                const KernelConfig& kernel) {
  require(teacher_features.shape() == student_features.shape() &&
              teacher_features.rank() >= 1,
          ErrorCode::kShape, "mmd_loss: feature shapes differ");
  const double h = kernel.resolve(teacher_features, student_features);
  require(h > 0.0, ErrorCode::kInvalidArgument, "non-positive bandwidth");
  const std::size_t c = teacher_features.shape().back();
  const std::size_t n = teacher_features.numel() / c;
  std::vector<double> t(teacher_features.data().begin(),
                        teacher_features.data().end());
  const auto s = student_features.data();
  const double inv2h2 = 1.0 / (2.0 * h * h);
  std::vector<double> kern(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double diff = s[i * c + k] - t[i * c + k];
      d2 += diff * diff;
    }
    kern[i] = std::exp(-d2 * inv2h2);
    total += 2.0 * (1.0 - kern[i]);
  }
  const double nn = static_cast<double>(n);
  return make_result(
      {}, {total / nn}, {student_features},
      [t = std::move(t), kern = std::move(kern), c, n, nn, h](detail::Node& self) {
        auto* g = parent_grad(self, 0);
        if (!g) return;
        const auto& s = self.parents[0]->value;
        const double up = self.grad[0] / nn;
        for (std::size_t i = 0; i < n; ++i) {
          const double coef = up * 2.0 * kern[i] / (h * h);
          for (std::size_t k = 0; k < c; ++k)
            (*g)[i * c + k] += coef * (s[i * c + k] - t[i * c + k]);
        }
      });
}

Tensor kl_known(const Tensor& teacher_probs, const Tensor& student_probs,
                const labeling::PartialLabels& labels) {
  check_probs(student_probs, labels, "kl_known");
  require(teacher_probs.shape() == student_probs.shape(), ErrorCode::kShape,
          "kl_known: teacher/student shapes differ");
  const double count = labels.indicator_count();
  if (count == 0.0)
    return make_result({}, {0.0}, {student_probs}, [](detail::Node&) {});
  std::vector<double> mask = labels.indicator();
  std::vector<double> t(teacher_probs.numel());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = clamp_prob(teacher_probs.data()[i]).value;
  const auto s = student_probs.data();
  double total = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (mask[i] != 0.0) total += t[i] * std::log(t[i] / clamp_prob(s[i]).value);
  return make_result(
      {}, {total / count}, {student_probs},
      [t = std::move(t), mask = std::move(mask), count](detail::Node& self) {
        auto* g = parent_grad(self, 0);
        if (!g) return;
        const auto& s = self.parents[0]->value;
        const double up = self.grad[0] / count;
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (mask[i] == 0.0) continue;
          const auto c = clamp_prob(s[i]);
          if (c.active) (*g)[i] -= up * t[i] / c.value;
        }
      });
}

Tensor adversarial_loss(const labeling::PartialLabels& labels,
                        const Tensor& student_probs) {
  check_probs(student_probs, labels, "adversarial_loss");
  const double count = labels.indicator_count();
  if (count == 0.0)
    return make_result({}, {0.0}, {student_probs}, [](detail::Node&) {});
  std::vector<double> pos(labels.values().size());
  for (std::size_t i = 0; i < pos.size(); ++i)
    pos[i] = labels.values()[i] == labeling::kPositive ? 1.0 : 0.0;
  const auto s = student_probs.data();
  double total = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (pos[i] != 0.0) total += std::log(clamp_prob(s[i]).value);
  return make_result({}, {total / count}, {student_probs},
                     [pos = std::move(pos), count](detail::Node& self) {
                       auto* g = parent_grad(self, 0);
                       if (!g) return;
                       const auto& s = self.parents[0]->value;
                       const double up = self.grad[0] / count;
                       for (std::size_t i = 0; i < pos.size(); ++i) {
                         if (pos[i] == 0.0) continue;
                         const auto c = clamp_prob(s[i]);
                         if (c.active) (*g)[i] += up / c.value;
                       }
                     });
}

Tensor s2_total(const Tensor& s2_classification, const Tensor& mmd,
                const Tensor& kl, const LossWeights& w) {
  w.validate();
  return ops::add(ops::add(s2_classification, ops::scale(mmd, w.lambda2)),
                  ops::scale(kl, w.lambda3));
}

Tensor total_loss(const Tensor& teacher_ce, const Tensor& s1_pseudo_ce,
                  const Tensor& s2_total) {
  for (const Tensor* t : {&teacher_ce, &s1_pseudo_ce, &s2_total})
    require(t->numel() == 1 && std::isfinite(t->item()), ErrorCode::kNumeric,
            "total_loss: non-finite component");
  return ops::add(ops::add(teacher_ce, s1_pseudo_ce), s2_total);
}

}  // namespace partscreen::losses
