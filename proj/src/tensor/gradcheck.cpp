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

#include "tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace partscreen {

GradCheckReport check_gradients(const ScalarFn& f, std::vector<Tensor> inputs,
                                double eps) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  std::vector<bool> saved_flags;
  for (auto& t : inputs) {
    require(t.is_leaf(), ErrorCode::kInvalidArgument,
            "check_gradients inputs must be leaf tensors");
    saved_flags.push_back(t.requires_grad());
    t.set_requires_grad(true);
    t.zero_grad();
  }

  Tensor out = f(inputs);
  require(out.numel() == 1, ErrorCode::kShape, "f must return a scalar");
  const double base = out.item();
  out.backward();
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    if (t.has_grad())
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    else
      analytic.emplace_back(t.numel(), 0.0);
  }

  auto eval = [&] {
    NoGradGuard guard;
    return f(inputs).item();
  };
  const double probe = eval();
  if (probe != base && !(std::isnan(probe) && std::isnan(base)))
    fail(ErrorCode::kInvalidArgument,
         "check_gradients: f is not deterministic across evaluations");

  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto data = inputs[k].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + eps;
      const double fp = eval();
      data[i] = orig - eps;
      const double fm = eval();
      data[i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error || std::isnan(rel)) {
        report.max_rel_error = std::isnan(rel) ? INFINITY : rel;
        report.worst_input = k;
        report.worst_element = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    inputs[k].zero_grad();
    inputs[k].set_requires_grad(saved_flags[k]);
  }
  return report;
}

}  // namespace partscreen
