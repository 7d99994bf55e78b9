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


#ifndef PARTSCREEN_TRAIN_MODEL_HPP_
#define PARTSCREEN_TRAIN_MODEL_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "decouple/decouple.hpp"
#include "tensor/tensor.hpp"

namespace partscreen::train {

struct ModelConfig {
  std::size_t in_channels = 1;
  std::vector<std::size_t> widths{8, 16, 32, 32};
  std::size_t tasks = 4;
  std::size_t text_dim = 32;
  std::size_t att_dim = 64;

  void validate() const;
  // Spatial extent after every block for an input of the given extent.
  std::size_t output_extent(std::size_t input) const;
};

// out[b,t] = sum_c f[b,t,c] w[t,c] + bias[t]
Tensor task_linear(const Tensor& features, const Tensor& weight, const Tensor& bias);

// Shared encoder (stride-2 3x3 conv + SiLU blocks), semantic decoupling and
// per-task logistic classifier. All three branches use this one instance.
class Network {
 public:
  Network() = default;
  Network(const ModelConfig& config, decouple::DiseaseEmbeddings embeddings,
          std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::size_t blocks() const { return conv_w_.size(); }
  const decouple::DiseaseEmbeddings& embeddings() const { return embeddings_; }

  Tensor block(std::size_t l, const Tensor& x) const;

  struct Head {
    Tensor features;  // [B, T, C]
    Tensor probs;     // [B, T]
  };
  Head head(const Tensor& feature_map) const;

  // Plain forward through every block.
  Tensor encode(const Tensor& images) const;

  // Fixed order; names are stable across runs and used by checkpoints.
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;

 private:
  ModelConfig config_;
  decouple::DiseaseEmbeddings embeddings_;
  std::vector<Tensor> conv_w_, conv_b_;
  decouple::DecoupleParams decouple_;
  Tensor cls_w_, cls_b_;
};

}  // namespace partscreen::train

#endif  // PARTSCREEN_TRAIN_MODEL_HPP_
