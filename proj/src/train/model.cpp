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


#include "train/model.hpp"

#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"
#include "tensor/serialize.hpp"

namespace partscreen::train {

namespace {

constexpr std::size_t kKernel = 3, kStride = 2, kPad = 1;

void round_leaf(Tensor& t) { round_to_float(t.mutable_data()); }

}  // namespace

void ModelConfig::validate() const {
  require(in_channels >= 1 && !widths.empty() && tasks >= 1 && text_dim >= 1 && att_dim >= 1,
          ErrorCode::kConfig, "model sizes must be positive and widths non-empty");
  for (auto w : widths) require(w >= 1, ErrorCode::kConfig, "block width must be >= 1");
}

std::size_t ModelConfig::output_extent(std::size_t input) const {
  std::size_t e = input;
  for (std::size_t l = 0; l < widths.size(); ++l) e = (e + 2 * kPad - kKernel) / kStride + 1;
  return e;
}

Tensor task_linear(const Tensor& features, const Tensor& weight, const Tensor& bias) {
  require(features.rank() == 3 && weight.rank() == 2 && bias.rank() == 1 &&
              weight.dim(0) == features.dim(1) && weight.dim(1) == features.dim(2) &&
              bias.dim(0) == features.dim(1),
          ErrorCode::kShape, "task_linear: f[B,T,C], w[T,C], b[T] expected");
  const std::size_t nb = features.dim(0), nt = features.dim(1), nc = features.dim(2);
  const auto f = features.data(), w = weight.data(), b = bias.data();
  std::vector<double> out(nb * nt);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t t = 0; t < nt; ++t) {
      double s = b[t];
      for (std::size_t c = 0; c < nc; ++c) s += f[(i * nt + t) * nc + c] * w[t * nc + c];
      out[i * nt + t] = s;
    }
  return make_result({nb, nt}, std::move(out), {features, weight, bias},
                     [nb, nt, nc](detail::Node& self) {
                       const auto& f = self.parents[0]->value;
                       const auto& w = self.parents[1]->value;
                       auto* gf = parent_grad(self, 0);
                       auto* gw = parent_grad(self, 1);
                       auto* gb = parent_grad(self, 2);
                       for (std::size_t i = 0; i < nb; ++i)
                         for (std::size_t t = 0; t < nt; ++t) {
                           const double g = self.grad[i * nt + t];
                           if (gb) (*gb)[t] += g;
                           for (std::size_t c = 0; c < nc; ++c) {
                             const std::size_t fi = (i * nt + t) * nc + c;
                             if (gf) (*gf)[fi] += g * w[t * nc + c];
                             if (gw) (*gw)[t * nc + c] += g * f[fi];
                           }
                         }
                     });
}

Network::Network(const ModelConfig& config, decouple::DiseaseEmbeddings embeddings,
                 std::uint64_t seed)
    : config_(config) {
  config_.validate();
  require(embeddings.tasks() == config_.tasks && embeddings.dim() == config_.text_dim,
          ErrorCode::kConfig,
          "embeddings are [" + std::to_string(embeddings.tasks()) + ", " +
              std::to_string(embeddings.dim()) + "] but the model expects [" +
              std::to_string(config_.tasks) + ", " + std::to_string(config_.text_dim) + "]");
  // Everything is kept at float precision so that a checkpoint round trip is
  // lossless.
  Tensor emb = embeddings.matrix().clone();
  round_to_float(emb.mutable_data());
  embeddings_ = decouple::DiseaseEmbeddings(emb);

  Rng rng(derive_seed(seed, {0x11E7}));
  std::size_t cin = config_.in_channels;
  for (auto cout : config_.widths) {
    const double std = std::sqrt(2.0 / static_cast<double>(cin * kKernel * kKernel));
    std::vector<double> w(cout * cin * kKernel * kKernel);
    for (auto& v : w) v = std * rng.normal();
    conv_w_.push_back(Tensor::from_data({cout, cin, kKernel, kKernel}, std::move(w), true));
    conv_b_.push_back(Tensor::zeros({cout}, true));
    cin = cout;
  }
  decouple_ = decouple::DecoupleParams::init(cin, config_.text_dim, config_.att_dim, rng);
  cls_w_ = Tensor::zeros({config_.tasks, cin}, true);
  cls_b_ = Tensor::zeros({config_.tasks}, true);
  for (auto& [name, p] : named_parameters()) {
    round_leaf(p);
    p.set_requires_grad(true);
  }
}

Tensor Network::block(std::size_t l, const Tensor& x) const {
  return ops::silu(ops::conv2d(x, conv_w_.at(l), conv_b_.at(l), kStride, kPad));
}

Network::Head Network::head(const Tensor& feature_map) const {
  Head h;
  h.features = decouple::decouple(feature_map, embeddings_, decouple_);
  h.probs = ops::sigmoid(task_linear(h.features, cls_w_, cls_b_));
  return h;
}

Tensor Network::encode(const Tensor& images) const {
  Tensor x = images;
  for (std::size_t l = 0; l < blocks(); ++l) x = block(l, x);
  return x;
}

std::vector<std::pair<std::string, Tensor>> Network::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    out.emplace_back("encoder." + std::to_string(l) + ".weight", conv_w_[l]);
    out.emplace_back("encoder." + std::to_string(l) + ".bias", conv_b_[l]);
  }
  out.emplace_back("decouple.w1", decouple_.w1);
  out.emplace_back("decouple.w2", decouple_.w2);
  out.emplace_back("decouple.v", decouple_.v);
  out.emplace_back("classifier.weight", cls_w_);
  out.emplace_back("classifier.bias", cls_b_);
  return out;
}

std::vector<Tensor> Network::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, p] : named_parameters()) out.push_back(p);
  return out;
}

}  // namespace partscreen::train
