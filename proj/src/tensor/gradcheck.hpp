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

#ifndef PARTSCREEN_TENSOR_GRADCHECK_HPP_
#define PARTSCREEN_TENSOR_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "tensor/tensor.hpp"

namespace partscreen {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

// Compares reverse-mode gradients of f at `inputs` against central
// differences (f(x+eps) - f(x-eps)) / (2 eps), elementwise, with relative
// error |a - n| / max(|a|, |n|, 1e-8). Inputs must be leaves; they are
// switched to requires_grad and restored bitwise afterwards. f must be
// deterministic: two evaluations at the base point that differ are rejected.
GradCheckReport check_gradients(const ScalarFn& f, std::vector<Tensor> inputs,
                                double eps = 1e-5);

}  // namespace partscreen

#endif  // PARTSCREEN_TENSOR_GRADCHECK_HPP_
