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

#ifndef PARTSCREEN_TENSOR_OPS_HPP_
#define PARTSCREEN_TENSOR_OPS_HPP_

#include <cstddef>

#include "tensor/tensor.hpp"

namespace partscreen::ops {

// Elementwise, identical shapes (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor square(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor silu(const Tensor& a);
Tensor softplus(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Weighted sum with a constant weight array of the same length; convenient
// for building scalar probes in gradient checks.
Tensor dot_const(const Tensor& a, std::span<const double> weights);

Tensor reshape(const Tensor& a, const Shape& shape);

// [M,K] x [K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);

// x: [B,Cin,H,W], weight: [Cout,Cin,K,K], bias: [Cout].
// Output spatial size: (H + 2*pad - K) / stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad);

// Softmax over the last axis, max-subtracted.
Tensor softmax_lastdim(const Tensor& a);

}  // namespace partscreen::ops

#endif  // PARTSCREEN_TENSOR_OPS_HPP_
