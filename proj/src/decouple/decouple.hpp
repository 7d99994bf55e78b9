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

#ifndef PARTSCREEN_DECOUPLE_DECOUPLE_HPP_
#define PARTSCREEN_DECOUPLE_DECOUPLE_HPP_

#include <cstdint>
#include <string>

#include "common/random.hpp"
#include "tensor/tensor.hpp"

// Text-guided semantic decoupling: each disease embedding attends over the
// spatial positions of the last feature map, producing one feature vector
// per disease.
namespace partscreen::decouple {

// Frozen [T, d_text] matrix, one row per disease.
class DiseaseEmbeddings {
 public:
  DiseaseEmbeddings() = default;
  explicit DiseaseEmbeddings(Tensor matrix);

  // Gaussian rows orthonormalized (Gram-Schmidt while rows <= d_text), from a
  // fixed seed.
  static DiseaseEmbeddings deterministic(std::size_t tasks, std::size_t dim,
                                         std::uint64_t seed);
  // Text file: header "T d_text", then T rows of d_text reals.
  static DiseaseEmbeddings load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t tasks() const { return matrix_.dim(0); }
  std::size_t dim() const { return matrix_.dim(1); }
  const Tensor& matrix() const { return matrix_; }
  // Embeddings with rows reordered: row t of the result is row perm[t].
  DiseaseEmbeddings permuted(const std::vector<std::size_t>& perm) const;

 private:
  Tensor matrix_;
};

struct DecoupleParams {
  Tensor w1;  // [d_att, C]
  Tensor w2;  // [d_att, d_text]
  Tensor v;   // [d_att]

  static DecoupleParams init(std::size_t channels, std::size_t text_dim,
                             std::size_t att_dim, Rng& rng);
  std::vector<Tensor> parameters() const { return {w1, w2, v}; }
};

// logits[b,t,n] = v . tanh((W1 F[b,:,n]) * (W2 d_t)), n over H*W positions.
// features: [B, C, H, W] -> [B, T, H*W].
Tensor attention_logits(const Tensor& features, const DiseaseEmbeddings& emb,
                        const DecoupleParams& params);

// Softmax of the logits over positions: [B, T, H*W], each row sums to 1.
Tensor attention_scores(const Tensor& features, const DiseaseEmbeddings& emb,
                        const DecoupleParams& params);

// Single-sample, single-disease form: F [C, H, W], d [d_text] -> alpha [H, W].
Tensor attention_map(const Tensor& features, const Tensor& embedding,
                     const DecoupleParams& params);

// f[b,t,c] = sum_n alpha[b,t,n] F[b,c,n]; alpha [B,T,N], F [B,C,H,W].
Tensor aggregate(const Tensor& alpha, const Tensor& features);

// Disease-aware features [B, T, C] (a [C,H,W] input yields [1, T, C]).
Tensor decouple(const Tensor& features, const DiseaseEmbeddings& emb,
                const DecoupleParams& params);

}  // namespace partscreen::decouple

#endif  // PARTSCREEN_DECOUPLE_DECOUPLE_HPP_
