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

#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Core>

#include "common/error.hpp"

namespace partscreen::ops {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMat =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), ErrorCode::kShape,
          std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
              " vs " + shape_str(b.shape()));
}

// Unary elementwise op given value and derivative-from-(input, output).
template <class F, class D>
Tensor unary(const Tensor& a, F f, D dfdx) {
  const auto in = a.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_result(a.shape(), std::move(out), {a}, [dfdx](detail::Node& self) {
    auto* ga = parent_grad(self, 0);
    if (!ga) return;
    const auto& x = self.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i)
      (*ga)[i] += self.grad[i] * dfdx(x[i], self.value[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "add");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (auto* g = parent_grad(self, k))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "sub");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "mul");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, stable_sigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Tensor silu(const Tensor& a) {
  const auto in = a.data();
  std::vector<double> out(in.size());
  auto sig = std::make_shared<std::vector<double>>(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    (*sig)[i] = 1.0 / (1.0 + std::exp(-in[i]));
    out[i] = in[i] * (*sig)[i];
  }
  return make_result(a.shape(), std::move(out), {a}, [sig](detail::Node& self) {
    auto* ga = parent_grad(self, 0);
    if (!ga) return;
    const auto& x = self.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = (*sig)[i];
      (*ga)[i] += self.grad[i] * s * (1.0 + x[i] * (1.0 - s));
    }
  });
}

Tensor softplus(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        return x > 30.0 ? x : (x < -30.0 ? std::exp(x) : std::log1p(std::exp(x)));
      },
      [](double x, double) { return stable_sigmoid(x); });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({}, {s}, {a}, [](detail::Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (auto& v : *g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  require(n > 0, ErrorCode::kShape, "mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

Tensor dot_const(const Tensor& a, std::span<const double> weights) {
  require(weights.size() == a.numel(), ErrorCode::kShape,
          "dot_const: weight length mismatch");
  const auto x = a.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * weights[i];
  std::vector<double> w(weights.begin(), weights.end());
  return make_result({}, {s}, {a}, [w = std::move(w)](detail::Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < w.size(); ++i) (*g)[i] += self.grad[0] * w[i];
  });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  require(numel_of(shape) == a.numel(), ErrorCode::kShape,
          "reshape " + shape_str(a.shape()) + " -> " + shape_str(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result(shape, std::move(out), {a}, [](detail::Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
          ErrorCode::kShape,
          "matmul " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const auto x = a.data(), y = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
    }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    const auto& g = self.grad;
    if (auto* ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * y[p * n + j];
          (*ga)[i * k + p] += s;
        }
    if (auto* gb = parent_grad(self, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double xv = x[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += xv * g[i * n + j];
        }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad) {
  require(x.rank() == 4 && weight.rank() == 4 && bias.rank() == 1,
          ErrorCode::kShape, "conv2d expects x[B,C,H,W], w[O,C,K,K], b[O]");
  const std::size_t nb = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t co = weight.dim(0), kk = weight.dim(2);
  require(weight.dim(1) == ci && weight.dim(3) == kk && bias.dim(0) == co,
          ErrorCode::kShape, "conv2d weight/bias shape mismatch");
  require(stride >= 1 && h + 2 * pad >= kk && w + 2 * pad >= kk,
          ErrorCode::kShape, "conv2d window larger than padded input");
  const std::size_t oh = (h + 2 * pad - kk) / stride + 1;
  const std::size_t ow = (w + 2 * pad - kk) / stride + 1;
  const std::size_t np = oh * ow, nk = ci * kk * kk;

  // Unfolded input: cols[b][(c,ky,kx)][(oy,ox)], zero where the window
  // leaves the image.
  auto cols = std::make_shared<std::vector<double>>(nb * nk * np, 0.0);
  const auto xin = x.data(), wt = weight.data(), bs = bias.data();
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t c = 0; c < ci; ++c) {
      const double* ip = &xin[(b * ci + c) * h * w];
      for (std::size_t ky = 0; ky < kk; ++ky)
        for (std::size_t kx = 0; kx < kk; ++kx) {
          double* col = &(*cols)[(b * nk + (c * kk + ky) * kk + kx) * np];
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride + ky) - std::ptrdiff_t(pad);
            if (iy < 0 || iy >= std::ptrdiff_t(h)) continue;
            const double* row = ip + iy * w;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride + kx) - std::ptrdiff_t(pad);
              if (ix >= 0 && ix < std::ptrdiff_t(w)) col[oy * ow + ox] = row[ix];
            }
          }
        }
    }

  std::vector<double> out(nb * co * np);
  const ConstMat wmat(wt.data(), co, nk);
  for (std::size_t b = 0; b < nb; ++b) {
    MatMap ob(&out[b * co * np], co, np);
    ob.noalias() = wmat * ConstMat(&(*cols)[b * nk * np], nk, np);
    for (std::size_t o = 0; o < co; ++o) ob.row(o).array() += bs[o];
  }

  return make_result(
      {nb, co, oh, ow}, std::move(out), {x, weight, bias},
      [=](detail::Node& self) {
        const auto& wt = self.parents[1]->value;
        const auto& g = self.grad;
        auto* gx = parent_grad(self, 0);
        auto* gw = parent_grad(self, 1);
        auto* gb = parent_grad(self, 2);
        std::vector<double> gcols(gx ? nk * np : 0);
        const ConstMat wmat(wt.data(), co, nk);
        for (std::size_t b = 0; b < nb; ++b) {
          const ConstMat gb_mat(&g[b * co * np], co, np);
          // Plain loop: a vectorised reduction would sum in an order that
          // depends on the buffer's alignment.
          if (gb)
            for (std::size_t o = 0; o < co; ++o) {
              const double* row = &g[(b * co + o) * np];
              double acc = 0.0;
              for (std::size_t k = 0; k < np; ++k) acc += row[k];
              (*gb)[o] += acc;
            }
          if (gw) {
            MatMap gw_mat(gw->data(), co, nk);
            gw_mat.noalias() += gb_mat * ConstMat(&(*cols)[b * nk * np], nk, np).transpose();
          }
          if (gx) {
            MatMap gc(gcols.data(), nk, np);
            gc.noalias() = wmat.transpose() * gb_mat;
          }
          if (!gx) continue;
          for (std::size_t c = 0; c < ci; ++c) {
            double* gi = &(*gx)[(b * ci + c) * h * w];
            for (std::size_t ky = 0; ky < kk; ++ky)
              for (std::size_t kx = 0; kx < kk; ++kx) {
                const double* gc = &gcols[((c * kk + ky) * kk + kx) * np];
                for (std::size_t oy = 0; oy < oh; ++oy) {
                  const std::ptrdiff_t iy =
                      std::ptrdiff_t(oy * stride + ky) - std::ptrdiff_t(pad);
                  if (iy < 0 || iy >= std::ptrdiff_t(h)) continue;
                  double* row = gi + iy * w;
                  for (std::size_t ox = 0; ox < ow; ++ox) {
                    const std::ptrdiff_t ix =
                        std::ptrdiff_t(ox * stride + kx) - std::ptrdiff_t(pad);
                    if (ix >= 0 && ix < std::ptrdiff_t(w)) row[ix] += gc[oy * ow + ox];
                  }
                }
              }
          }
        }
      });
}

Tensor softmax_lastdim(const Tensor& a) {
  require(a.rank() >= 1 && a.shape().back() > 0, ErrorCode::kShape,
          "softmax over empty axis");
  const std::size_t n = a.shape().back();
  const std::size_t rows = a.numel() / n;
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &x[r * n];
    double* yr = &out[r * n];
    const double mx = *std::max_element(xr, xr + n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (yr[i] = std::exp(xr[i] - mx));
    for (std::size_t i = 0; i < n; ++i) yr[i] /= z;
  }
  return make_result(a.shape(), std::move(out), {a}, [rows, n](detail::Node& self) {
    auto* ga = parent_grad(self, 0);
    if (!ga) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = &self.value[r * n];
      const double* g = &self.grad[r * n];
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[i] * y[i];
      for (std::size_t i = 0; i < n; ++i) (*ga)[r * n + i] += y[i] * (g[i] - dot);
    }
  });
}

}  // namespace partscreen::ops
