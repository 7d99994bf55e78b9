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


#ifndef PARTSCREEN_TRAIN_OPTIMIZER_HPP_
#define PARTSCREEN_TRAIN_OPTIMIZER_HPP_

#include <cstddef>
#include <vector>

#include "tensor/tensor.hpp"

namespace partscreen::train {

struct AdamWConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled weight decay Adam:
//   p <- p (1 - lr wd);  m, v updated;  p <- p - lr mhat / (sqrt(vhat) + eps).
// Parameters without a gradient are left alone.
class AdamW {
 public:
  AdamW() = default;
  AdamW(std::vector<Tensor> params, AdamWConfig config);

  void step();
  void zero_grad();
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }
  const AdamWConfig& config() const { return config_; }

  // Global L2 norm of all gradients; NaN/inf propagate.
  double grad_norm() const;
  bool grads_finite() const;
  void scale_grads(double factor);

  std::size_t steps() const { return steps_; }
  std::vector<Tensor>& params() { return params_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_steps(std::size_t s) { steps_ = s; }

 private:
  std::vector<Tensor> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t steps_ = 0;
};

}  // namespace partscreen::train

#endif  // PARTSCREEN_TRAIN_OPTIMIZER_HPP_
