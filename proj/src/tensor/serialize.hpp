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

#ifndef PARTSCREEN_TENSOR_SERIALIZE_HPP_
#define PARTSCREEN_TENSOR_SERIALIZE_HPP_

#include <iosfwd>
#include <string>

#include "tensor/tensor.hpp"

namespace partscreen {

// Wire format: u64 rank, rank x u64 dims, then numel x f32 payload; all
// little-endian. Values are narrowed to float on write.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void save_tensor_file(const std::string& path, const Tensor& t);
Tensor load_tensor_file(const std::string& path);

// Rounds every value to the nearest float, i.e. what a write/read cycle
// would produce.
void round_to_float(std::span<double> values);

}  // namespace partscreen

#endif  // PARTSCREEN_TENSOR_SERIALIZE_HPP_
