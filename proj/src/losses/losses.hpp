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

#ifndef PARTSCREEN_LOSSES_LOSSES_HPP_
#define PARTSCREEN_LOSSES_LOSSES_HPP_

#include <optional>

#include "labeling/labels.hpp"
#include "tensor/tensor.hpp"

// Training objectives. Probabilities are [B, T]; masked averages divide by
// the number of active (sample, task) entries in the whole batch and return
// an exact 0 with zero gradient when nothing is active.
namespace partscreen::losses {

constexpr double kProbClamp = 1e-7;

struct LossWeights {
  double lambda1 = 0.6;   // pseudo-label term of the student-2 classification
  double lambda2 = 0.05;  // feature consistency (MMD)
  double lambda3 = 1.0;   // prediction consistency (KL)

  void validate() const;
};

// Gaussian kernel bandwidth: fixed, or the median of cross pairwise
// distances between teacher and student feature vectors in the batch
// (floored at 1e-3), recomputed per call and treated as a constant.
struct KernelConfig {
  std::optional<double> bandwidth;

  static KernelConfig median_heuristic() { return {}; }
  static KernelConfig fixed(double h) { return KernelConfig{h}; }
  double resolve(const Tensor& teacher, const Tensor& student) const;
};

enum class MaskSource { kKnown, kPseudo };

// -(1/|m|) sum m_t (y log p + (1-y) log(1-p)); the mask m is the indicator of
// `labels` (ground truth for kKnown, pseudo labels for kPseudo).
Tensor partial_bce(const Tensor& probs, const labeling::LabelMatrix& labels,
                   MaskSource source = MaskSource::kKnown);

// Known-label BCE plus lambda1 times pseudo-label BCE.
Tensor s2_classification_loss(const Tensor& probs,
                              const labeling::PartialLabels& labels,
                              const labeling::PseudoLabels& pseudo,
                              const LossWeights& w);

// mean over (b,t) of 2 (1 - exp(-|f - f_bar|^2 / (2 h^2))); teacher features
// are used as constants.
Tensor mmd_loss(const Tensor& teacher_features,
                const Tensor& student_features, const KernelConfig& kernel);

// (1/|delta|) sum delta_t y_hat log(y_hat / y_bar); teacher side constant.
Tensor kl_known(const Tensor& teacher_probs, const Tensor& student_probs,
                const labeling::PartialLabels& labels);

// -(1/|delta|) sum delta_t y_t log(y_t / y_bar_t) with 0 log 0 = 0, i.e.
// (1/|delta|) times the sum of log y_bar over known positives. Always <= 0.
Tensor adversarial_loss(const labeling::PartialLabels& labels,
                        const Tensor& student_probs);

// s2_classification + lambda2 * mmd + lambda3 * kl.
Tensor s2_total(const Tensor& s2_classification, const Tensor& mmd,
                const Tensor& kl, const LossWeights& w);

// teacher known-label CE + student-1 pseudo-label CE + student-2 total.
Tensor total_loss(const Tensor& teacher_ce, const Tensor& s1_pseudo_ce,
                  const Tensor& s2_total);

}  // namespace partscreen::losses

#endif  // PARTSCREEN_LOSSES_LOSSES_HPP_
