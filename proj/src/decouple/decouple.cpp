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

#include "decouple/decouple.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace partscreen::decouple {

namespace {

Tensor as_batched(const Tensor& f) {
  if (f.rank() == 4) return f;
  require(f.rank() == 3, ErrorCode::kShape,
          "features must be [C,H,W] or [B,C,H,W], got " + shape_str(f.shape()));
  return ops::reshape(f, {1, f.dim(0), f.dim(1), f.dim(2)});
}

Tensor gaussian(const Shape& shape, double stddev, Rng& rng) {
  std::vector<double> v(numel_of(shape));
  for (auto& x : v) x = stddev * rng.normal();
  return Tensor::from_data(shape, std::move(v), true);
}

}  // namespace

DiseaseEmbeddings::DiseaseEmbeddings(Tensor matrix) : matrix_(std::move(matrix)) {
  require(matrix_.rank() == 2 && matrix_.dim(0) >= 1 && matrix_.dim(1) >= 1,
          ErrorCode::kShape, "embeddings must be a non-empty [T, d_text] matrix");
  for (double v : matrix_.data())
    require(std::isfinite(v), ErrorCode::kInvalidArgument,
            "embeddings must be finite");
  matrix_.set_requires_grad(false);
}

DiseaseEmbeddings DiseaseEmbeddings::deterministic(std::size_t tasks,
                                                   std::size_t dim,
                                                   std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xE3B}));
  std::vector<double> m(tasks * dim);
  for (auto& x : m) x = rng.normal();
  for (std::size_t t = 0; t < tasks; ++t) {
    double* row = &m[t * dim];
    if (t < dim) {
      for (std::size_t s = 0; s < t; ++s) {
        const double* prev = &m[s * dim];
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += row[k] * prev[k];
        for (std::size_t k = 0; k < dim; ++k) row[k] -= dot * prev[k];
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) norm += row[k] * row[k];
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < dim; ++k) row[k] /= norm;
  }
  return DiseaseEmbeddings(Tensor::from_data({tasks, dim}, std::move(m)));
}

DiseaseEmbeddings DiseaseEmbeddings::load(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kIo,
          "cannot open embedding file " + path);
  std::size_t t = 0, d = 0;
  is >> t >> d;
  require(static_cast<bool>(is) && t > 0 && d > 0, ErrorCode::kIo,
          "embedding file needs a header line \"T d_text\"");
  std::vector<double> m(t * d);
  for (auto& x : m) {
    is >> x;
    require(static_cast<bool>(is), ErrorCode::kIo,
            "embedding file " + path + " has fewer than T*d_text values");
  }
  double extra = 0.0;
  require(!(is >> extra), ErrorCode::kIo,
          "embedding file " + path + " has trailing values");
  return DiseaseEmbeddings(Tensor::from_data({t, d}, std::move(m)));
}

void DiseaseEmbeddings::save(const std::string& path) const {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + path);
  os << tasks() << " " << dim() << "\n" << std::setprecision(17);
  const auto m = matrix_.data();
  for (std::size_t t = 0; t < tasks(); ++t) {
    for (std::size_t k = 0; k < dim(); ++k)
      os << (k ? " " : "") << m[t * dim() + k];
    os << "\n";
  }
}

DiseaseEmbeddings DiseaseEmbeddings::permuted(
    const std::vector<std::size_t>& perm) const {
  require(perm.size() == tasks(), ErrorCode::kShape, "permutation size");
  std::vector<double> m(matrix_.numel());
  const auto src = matrix_.data();
  for (std::size_t t = 0; t < tasks(); ++t)
    std::copy_n(&src[perm[t] * dim()], dim(), &m[t * dim()]);
  return DiseaseEmbeddings(Tensor::from_data(matrix_.shape(), std::move(m)));
}

DecoupleParams DecoupleParams::init(std::size_t channels, std::size_t text_dim,
                                    std::size_t att_dim, Rng& rng) {
  DecoupleParams p;
  p.w1 = gaussian({att_dim, channels}, 1.0 / std::sqrt(double(channels)), rng);
  p.w2 = gaussian({att_dim, text_dim}, 1.0 / std::sqrt(double(text_dim)), rng);
  p.v = gaussian({att_dim}, 1.0 / std::sqrt(double(att_dim)), rng);
  return p;
}

Tensor attention_logits(const Tensor& features_in, const DiseaseEmbeddings& emb,
                        const DecoupleParams& params) {
  const Tensor features = as_batched(features_in);
  const std::size_t nb = features.dim(0), nc = features.dim(1);
  const std::size_t npos = features.dim(2) * features.dim(3);
  const std::size_t na = params.w1.dim(0), nt = emb.tasks(), nd = emb.dim();
  require(params.w1.rank() == 2 && params.w1.dim(1) == nc, ErrorCode::kShape,
          "W1 must be [d_att, C]");
  require(params.w2.rank() == 2 && params.w2.dim(0) == na &&
              params.w2.dim(1) == nd,
          ErrorCode::kShape, "W2 must be [d_att, d_text]");
  require(params.v.numel() == na, ErrorCode::kShape, "v must be [d_att]");

  const auto f = features.data(), w1 = params.w1.data(),
             w2 = params.w2.data(), v = params.v.data(),
             e = emb.matrix().data();
  // u[b,a,n] = W1 F
  std::vector<double> u(nb * na * npos, 0.0);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t a = 0; a < na; ++a) {
      double* ur = &u[(b * na + a) * npos];
      for (std::size_t c = 0; c < nc; ++c) {
        const double wv = w1[a * nc + c];
        const double* fr = &f[(b * nc + c) * npos];
        for (std::size_t n = 0; n < npos; ++n) ur[n] += wv * fr[n];
      }
    }
  // gt[a,t] = W2 d_t
  std::vector<double> gt(na * nt, 0.0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (std::size_t d = 0; d < nd; ++d) s += w2[a * nd + d] * e[t * nd + d];
      gt[a * nt + t] = s;
    }
  // th[b,t,a,n] and logits[b,t,n]
  std::vector<double> th(nb * nt * na * npos);
  std::vector<double> logits(nb * nt * npos, 0.0);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t t = 0; t < nt; ++t) {
      double* lr = &logits[(b * nt + t) * npos];
      for (std::size_t a = 0; a < na; ++a) {
        const double* ur = &u[(b * na + a) * npos];
        double* tr = &th[((b * nt + t) * na + a) * npos];
        const double g = gt[a * nt + t];
        for (std::size_t n = 0; n < npos; ++n) {
          tr[n] = std::tanh(ur[n] * g);
          lr[n] += v[a] * tr[n];
        }
      }
    }

  return make_result(
      {nb, nt, npos}, std::move(logits),
      {features, params.w1, params.w2, params.v, emb.matrix()},
      [=, u = std::move(u), gt = std::move(gt),
       th = std::move(th)](detail::Node& self) {
        const auto& f = self.parents[0]->value;
        const auto& w1 = self.parents[1]->value;
        const auto& v = self.parents[3]->value;
        const auto& e = self.parents[4]->value;
        auto* gf = parent_grad(self, 0);
        auto* gw1 = parent_grad(self, 1);
        auto* gw2 = parent_grad(self, 2);
        auto* gv = parent_grad(self, 3);
        const auto& gl = self.grad;
        std::vector<double> du(nb * na * npos, 0.0);
        std::vector<double> dgt(na * nt, 0.0);
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t t = 0; t < nt; ++t) {
            const double* glr = &gl[(b * nt + t) * npos];
            for (std::size_t a = 0; a < na; ++a) {
              const double* tr = &th[((b * nt + t) * na + a) * npos];
              const double* ur = &u[(b * na + a) * npos];
              double* dur = &du[(b * na + a) * npos];
              const double g = gt[a * nt + t];
              double acc_v = 0.0, acc_g = 0.0;
              for (std::size_t n = 0; n < npos; ++n) {
                acc_v += glr[n] * tr[n];
                const double dpre = glr[n] * v[a] * (1.0 - tr[n] * tr[n]);
                dur[n] += dpre * g;
                acc_g += dpre * ur[n];
              }
              if (gv) (*gv)[a] += acc_v;
              dgt[a * nt + t] += acc_g;
            }
          }
        if (gw2)
          for (std::size_t a = 0; a < na; ++a)
            for (std::size_t t = 0; t < nt; ++t) {
              const double d = dgt[a * nt + t];
              for (std::size_t k = 0; k < nd; ++k) (*gw2)[a * nd + k] += d * e[t * nd + k];
            }
        if (gw1 || gf)
          for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t a = 0; a < na; ++a) {
              const double* dur = &du[(b * na + a) * npos];
              for (std::size_t c = 0; c < nc; ++c) {
                const double* fr = &f[(b * nc + c) * npos];
                if (gw1) {
                  double s = 0.0;
                  for (std::size_t n = 0; n < npos; ++n) s += dur[n] * fr[n];
                  (*gw1)[a * nc + c] += s;
                }
                if (gf) {
                  const double wv = w1[a * nc + c];
                  double* gfr = &(*gf)[(b * nc + c) * npos];
                  for (std::size_t n = 0; n < npos; ++n) gfr[n] += wv * dur[n];
                }
              }
            }
      });
}

Tensor attention_scores(const Tensor& features, const DiseaseEmbeddings& emb,
                        const DecoupleParams& params) {
  return ops::softmax_lastdim(attention_logits(features, emb, params));
}

Tensor attention_map(const Tensor& features, const Tensor& embedding,
                     const DecoupleParams& params) {
  require(features.rank() == 3, ErrorCode::kShape, "attention_map wants [C,H,W]");
  require(embedding.rank() == 1, ErrorCode::kShape, "embedding must be a vector");
  const DiseaseEmbeddings single(
      Tensor::from_data({1, embedding.numel()},
                        {embedding.data().begin(), embedding.data().end()}));
  const Tensor alpha = attention_scores(features, single, params);
  return ops::reshape(alpha, {features.dim(1), features.dim(2)});
}

Tensor aggregate(const Tensor& alpha, const Tensor& features_in) {
  const Tensor features = as_batched(features_in);
  const std::size_t nb = features.dim(0), nc = features.dim(1);
  const std::size_t npos = features.dim(2) * features.dim(3);
  require(alpha.rank() == 3 && alpha.dim(0) == nb && alpha.dim(2) == npos,
          ErrorCode::kShape, "alpha must be [B, T, H*W]");
  const std::size_t nt = alpha.dim(1);
  const auto al = alpha.data(), f = features.data();
  std::vector<double> out(nb * nt * nc, 0.0);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t c = 0; c < nc; ++c) {
        const double* ar = &al[(b * nt + t) * npos];
        const double* fr = &f[(b * nc + c) * npos];
        double s = 0.0;
        for (std::size_t n = 0; n < npos; ++n) s += ar[n] * fr[n];
        out[(b * nt + t) * nc + c] = s;
      }
  return make_result({nb, nt, nc}, std::move(out), {alpha, features},
                     [=](detail::Node& self) {
                       const auto& al = self.parents[0]->value;
                       const auto& f = self.parents[1]->value;
                       auto* ga = parent_grad(self, 0);
                       auto* gf = parent_grad(self, 1);
                       for (std::size_t b = 0; b < nb; ++b)
                         for (std::size_t t = 0; t < nt; ++t)
                           for (std::size_t c = 0; c < nc; ++c) {
                             const double g = self.grad[(b * nt + t) * nc + c];
                             const double* ar = &al[(b * nt + t) * npos];
                             const double* fr = &f[(b * nc + c) * npos];
                             if (ga) {
                               double* gar = &(*ga)[(b * nt + t) * npos];
                               for (std::size_t n = 0; n < npos; ++n) gar[n] += g * fr[n];
                             }
                             if (gf) {
                               double* gfr = &(*gf)[(b * nc + c) * npos];
                               for (std::size_t n = 0; n < npos; ++n) gfr[n] += g * ar[n];
                             }
                           }
                     });
}

Tensor decouple(const Tensor& features, const DiseaseEmbeddings& emb,
                const DecoupleParams& params) {
  const Tensor batched = as_batched(features);
  return aggregate(attention_scores(batched, emb, params), batched);
}

}  // namespace partscreen::decouple
