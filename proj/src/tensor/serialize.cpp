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

#include "tensor/serialize.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "common/error.hpp"

namespace partscreen {

namespace {

constexpr std::uint64_t kMaxRank = 16;

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b;
  is.read(reinterpret_cast<char*>(b.data()), 8);
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated tensor header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  const auto& shape = t.shape();
  put_u64(os, shape.size());
  for (auto d : shape) put_u64(os, d);
  const auto data = t.data();
  std::vector<char> payload(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(data[i]));
    for (int k = 0; k < 4; ++k)
      payload[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  require(static_cast<bool>(os), ErrorCode::kIo, "tensor write failed");
}

Tensor read_tensor(std::istream& is) {
  const std::uint64_t rank = get_u64(is);
  require(rank <= kMaxRank, ErrorCode::kIo,
          "implausible tensor rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = get_u64(is);
  const std::size_t n = numel_of(shape);
  std::vector<unsigned char> payload(n * 4);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size()));
  require(static_cast<bool>(is), ErrorCode::kIo, "truncated tensor payload");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k)
      bits |= static_cast<std::uint32_t>(payload[4 * i + k]) << (8 * k);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return Tensor::from_data(shape, std::move(data));
}

void save_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path);
  write_tensor(os, t);
}

Tensor load_tensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path);
  return read_tensor(is);
}

void round_to_float(std::span<double> values) {
  for (auto& v : values) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace partscreen
