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


#include "train/optimizer.hpp"

#include <cmath>

#include "common/error.hpp"

namespace partscreen::train {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  require(config_.lr >= 0.0 && config_.weight_decay >= 0.0 && config_.eps > 0.0 &&
              config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 &&
              config_.beta2 < 1.0,
          ErrorCode::kConfig, "invalid AdamW settings");
  for (const auto& p : params_) {
    require(p.is_leaf(), ErrorCode::kInvalidArgument, "optimizer parameters must be leaves");
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamW::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    auto x = p.mutable_data();
    const auto g = p.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] *= decay;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1, vhat = v[i] / bc2;
      x[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double AdamW::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_)
    for (double g : p.grad()) s += g * g;
  return std::sqrt(s);
}

bool AdamW::grads_finite() const {
  for (const auto& p : params_)
    for (double g : p.grad())
      if (!std::isfinite(g)) return false;
  return true;
}

void AdamW::scale_grads(double factor) {
  for (auto& p : params_)
    for (double& g : p.mutable_grad()) g *= factor;
}

}  // namespace partscreen::train
