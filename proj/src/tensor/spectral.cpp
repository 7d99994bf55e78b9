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

#include "tensor/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "common/error.hpp"

namespace partscreen::spectral {

using cd = std::complex<double>;

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// e^{-2 pi i k / n}, k in [0, n).
const std::vector<cd>& twiddles(std::size_t n) {
  thread_local std::map<std::size_t, std::vector<cd>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cd> t(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(n);
    t[k] = cd(std::cos(a), std::sin(a));
  }
  return cache.emplace(n, std::move(t)).first->second;
}

// a * conj?(w) without the special-value handling of std::complex's operator*.
inline cd mul(cd a, cd w, bool conj) {
  const double wi = conj ? -w.imag() : w.imag();
  return cd(a.real() * w.real() - a.imag() * wi, a.real() * wi + a.imag() * w.real());
}

void dft1(cd* a, std::size_t n, const std::vector<cd>& tw, bool inverse,
          std::vector<cd>& scratch) {
  if (n == 1) return;
  if (is_pow2(n)) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t step = n / len, half = len / 2;
      for (std::size_t i = 0; i < n; i += len)
        for (std::size_t k = 0; k < half; ++k) {
          const cd u = a[i + k];
          const cd v = mul(a[i + k + half], tw[k * step], inverse);
          a[i + k] = u + v;
          a[i + k + half] = u - v;
        }
    }
    return;
  }
  scratch.assign(n, cd(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    cd s(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) s += mul(a[j], tw[(k * j) % n], inverse);
    scratch[k] = s;
  }
  std::copy(scratch.begin(), scratch.end(), a);
}

struct PlaneGeometry {
  std::size_t planes, h, w;
};

PlaneGeometry real_geometry(const Shape& s) {
  require(s.size() >= 2, ErrorCode::kShape,
          "spectral transform needs at least [H,W], got " + shape_str(s));
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  require(h >= 1 && w >= 1, ErrorCode::kShape, "empty spatial extent");
  return {numel_of(s) / (h * w), h, w};
}

PlaneGeometry complex_geometry(const Shape& s) {
  require(s.size() >= 3 && s.back() == 2, ErrorCode::kShape,
          "complex tensor needs trailing axis 2, got " + shape_str(s));
  const std::size_t h = s[s.size() - 3], w = s[s.size() - 2];
  return {numel_of(s) / (h * w * 2), h, w};
}

// Real plane -> centered complex (re,im interleaved).
void forward_plane(const double* in, double* out, std::size_t h, std::size_t w,
                   std::vector<cd>& buf) {
  buf.resize(h * w);
  for (std::size_t i = 0; i < h * w; ++i) buf[i] = cd(in[i], 0.0);
  dft2_plane(buf, h, w, false);
  const std::size_t ch = h / 2, cw = w / 2;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const cd v = buf[((i + h - ch) % h) * w + (j + w - cw) % w];
      out[2 * (i * w + j)] = v.real();
      out[2 * (i * w + j) + 1] = v.imag();
    }
}

// Centered complex -> unnormalized inverse transform (complex plane).
void inverse_plane(const double* in, std::size_t h, std::size_t w,
                   std::vector<cd>& buf) {
  buf.resize(h * w);
  const std::size_t ch = h / 2, cw = w / 2;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      buf[((i + h - ch) % h) * w + (j + w - cw) % w] =
          cd(in[2 * (i * w + j)], in[2 * (i * w + j) + 1]);
    }
  dft2_plane(buf, h, w, true);
}

}  // namespace

long frequency_of(std::size_t i, std::size_t n) {
  return static_cast<long>(i) - static_cast<long>(n / 2);
}

std::size_t conjugate_index(std::size_t i, std::size_t n) {
  return (2 * (n / 2) + n - i) % n;
}

void dft2_plane(std::span<cd> plane, std::size_t h, std::size_t w,
                bool inverse) {
  require(plane.size() == h * w, ErrorCode::kShape, "plane size mismatch");
  std::vector<cd> scratch;
  const auto& tw_w = twiddles(w);
  for (std::size_t i = 0; i < h; ++i) dft1(&plane[i * w], w, tw_w, inverse, scratch);
  if (h == 1) return;
  const auto& tw_h = twiddles(h);
  std::vector<cd> col(h);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < h; ++i) col[i] = plane[i * w + j];
    dft1(col.data(), h, tw_h, inverse, scratch);
    for (std::size_t i = 0; i < h; ++i) plane[i * w + j] = col[i];
  }
}

Tensor fft2_centered_complex(const Tensor& x) {
  const auto g = real_geometry(x.shape());
  const auto in = x.data();
  for (double v : in)
    require(std::isfinite(v), ErrorCode::kNumeric,
            "fft2_centered: non-finite input");
  Shape out_shape = x.shape();
  out_shape.push_back(2);
  std::vector<double> out(in.size() * 2);
  std::vector<cd> buf;
  const std::size_t hw = g.h * g.w;
  for (std::size_t p = 0; p < g.planes; ++p)
    forward_plane(&in[p * hw], &out[p * hw * 2], g.h, g.w, buf);

  return make_result(out_shape, std::move(out), {x}, [g](detail::Node& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    const std::size_t hw = g.h * g.w;
    std::vector<cd> buf;
    for (std::size_t p = 0; p < g.planes; ++p) {
      inverse_plane(&self.grad[p * hw * 2], g.h, g.w, buf);
      for (std::size_t i = 0; i < hw; ++i) (*gx)[p * hw + i] += buf[i].real();
    }
  });
}

Tensor ifft2_centered_complex(const Tensor& z) {
  const auto g = complex_geometry(z.shape());
  const auto in = z.data();
  for (double v : in)
    require(std::isfinite(v), ErrorCode::kNumeric,
            "ifft2_centered: non-finite spectrum");
  Shape out_shape(z.shape().begin(), z.shape().end() - 1);
  const std::size_t hw = g.h * g.w;
  const double norm = 1.0 / static_cast<double>(hw);
  std::vector<double> out(g.planes * hw);
  double max_real = 0.0, max_imag = 0.0;
  std::vector<cd> buf;
  for (std::size_t p = 0; p < g.planes; ++p) {
    inverse_plane(&in[p * hw * 2], g.h, g.w, buf);
    for (std::size_t i = 0; i < hw; ++i) {
      const double re = buf[i].real() * norm, im = buf[i].imag() * norm;
      out[p * hw + i] = re;
      max_real = std::max(max_real, std::abs(re));
      max_imag = std::max(max_imag, std::abs(im));
    }
  }
  if (max_imag > kImaginaryResidueTolerance * max_real && max_imag > 1e-12) {
    std::ostringstream msg;
    msg << "ifft2_centered: imaginary residue " << max_imag
        << " exceeds tolerance relative to output magnitude " << max_real
        << " (spectrum is not conjugate-symmetric)";
    fail(ErrorCode::kNumeric, msg.str());
  }

  return make_result(out_shape, std::move(out), {z}, [g, norm](detail::Node& self) {
    auto* gz = parent_grad(self, 0);
    if (!gz) return;
    const std::size_t hw = g.h * g.w;
    std::vector<double> tmp(hw * 2);
    std::vector<cd> buf;
    for (std::size_t p = 0; p < g.planes; ++p) {
      forward_plane(&self.grad[p * hw], tmp.data(), g.h, g.w, buf);
      double* dst = &(*gz)[p * hw * 2];
      for (std::size_t i = 0; i < hw * 2; ++i) dst[i] += norm * tmp[i];
    }
  });
}

Tensor complex_abs(const Tensor& z) {
  complex_geometry(z.shape());
  const auto in = z.data();
  const std::size_t n = in.size() / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::hypot(in[2 * i], in[2 * i + 1]);
  Shape s(z.shape().begin(), z.shape().end() - 1);
  return make_result(s, std::move(out), {z}, [n](detail::Node& self) {
    auto* gz = parent_grad(self, 0);
    if (!gz) return;
    const auto& zin = self.parents[0]->value;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = self.value[i];
      if (a == 0.0) continue;  // subgradient 0 at the origin
      (*gz)[2 * i] += self.grad[i] * zin[2 * i] / a;
      (*gz)[2 * i + 1] += self.grad[i] * zin[2 * i + 1] / a;
    }
  });
}

Tensor complex_angle(const Tensor& z) {
  complex_geometry(z.shape());
  const auto in = z.data();
  const std::size_t n = in.size() / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::atan2(in[2 * i + 1], in[2 * i]);
  Shape s(z.shape().begin(), z.shape().end() - 1);
  return make_result(s, std::move(out), {z}, [n](detail::Node& self) {
    auto* gz = parent_grad(self, 0);
    if (!gz) return;
    const auto& zin = self.parents[0]->value;
    for (std::size_t i = 0; i < n; ++i) {
      const double re = zin[2 * i], im = zin[2 * i + 1];
      const double a2 = re * re + im * im;
      if (a2 == 0.0) continue;
      (*gz)[2 * i] += -self.grad[i] * im / a2;
      (*gz)[2 * i + 1] += self.grad[i] * re / a2;
    }
  });
}

Tensor polar(const Tensor& amplitude, const Tensor& phase) {
  require(amplitude.shape() == phase.shape(), ErrorCode::kShape,
          "polar: amplitude/phase shape mismatch");
  const auto a = amplitude.data(), p = phase.data();
  const std::size_t n = a.size();
  std::vector<double> out(2 * n);
  // cos and sin of the phase, kept for the backward pass.
  auto trig = std::make_shared<std::vector<double>>(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(p[i]), s = std::sin(p[i]);
    (*trig)[2 * i] = c;
    (*trig)[2 * i + 1] = s;
    out[2 * i] = a[i] * c;
    out[2 * i + 1] = a[i] * s;
  }
  Shape s = amplitude.shape();
  s.push_back(2);
  return make_result(s, std::move(out), {amplitude, phase}, [n, trig](detail::Node& self) {
    const auto& a = self.parents[0]->value;
    auto* ga = parent_grad(self, 0);
    auto* gp = parent_grad(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double gr = self.grad[2 * i], gi = self.grad[2 * i + 1];
      const double c = (*trig)[2 * i], s = (*trig)[2 * i + 1];
      if (ga) (*ga)[i] += gr * c + gi * s;
      if (gp) (*gp)[i] += a[i] * (-gr * s + gi * c);
    }
  });
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

// Twiddle table e^{-2 pi i f(k) t / n} for the shifted indices k of [begin,
// end) and t in [0, n); row k - begin.
std::vector<cd> window_twiddles(std::size_t n, std::size_t begin, std::size_t end) {
  const auto& tw = twiddles(n);
  std::vector<cd> out((end - begin) * n);
  for (std::size_t k = begin; k < end; ++k) {
    const long f = frequency_of(k, n);
    const std::size_t fm = static_cast<std::size_t>((f % long(n) + long(n)) % long(n));
    for (std::size_t t = 0; t < n; ++t) out[(k - begin) * n + t] = tw[(fm * t) % n];
  }
  return out;
}

// Separable basis of a window: the column transform is one real matrix
// product over all rows of all planes, the row transform a short loop per
// plane.
struct WindowBasis {
  std::size_t h, w, nr, nc;
  std::vector<cd> th;  // [nr, h]
  RowMat cols;         // [w, 2 nc]: real parts, then imaginary parts
};

WindowBasis window_basis(std::size_t h, std::size_t w, const Window& win) {
  require(win.row_begin < win.row_end && win.row_end <= h && win.col_begin < win.col_end &&
              win.col_end <= w,
          ErrorCode::kShape, "spectral window outside the array");
  WindowBasis b{h, w, win.rows(), win.cols(), window_twiddles(h, win.row_begin, win.row_end),
                RowMat(w, 2 * win.cols())};
  const auto tw = window_twiddles(w, win.col_begin, win.col_end);
  for (std::size_t v = 0; v < b.nc; ++v)
    for (std::size_t x = 0; x < w; ++x) {
      b.cols(x, v) = tw[v * w + x].real();
      b.cols(x, b.nc + v) = tw[v * w + x].imag();
    }
  return b;
}

// out[p, u, v] = scale * sum_{y,x} in[p, y, x] e^{-i(theta_u y + theta_v x)}
void window_analysis(const WindowBasis& b, std::size_t planes, const double* in, double* out,
                     double scale) {
  RowMat t = ConstRowMap(in, planes * b.h, b.w) * b.cols;
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t u = 0; u < b.nr; ++u) {
      const cd* th = &b.th[u * b.h];
      for (std::size_t v = 0; v < b.nc; ++v) {
        double re = 0.0, im = 0.0;
        for (std::size_t y = 0; y < b.h; ++y) {
          const double ar = t(p * b.h + y, v), ai = t(p * b.h + y, b.nc + v);
          re += ar * th[y].real() - ai * th[y].imag();
          im += ar * th[y].imag() + ai * th[y].real();
        }
        out[2 * ((p * b.nr + u) * b.nc + v)] = scale * re;
        out[2 * ((p * b.nr + u) * b.nc + v) + 1] = scale * im;
      }
    }
}

// out[p, y, x] += scale * Re sum_{u,v} in[p, u, v] e^{+i(theta_u y + theta_v x)}
void window_synthesis(const WindowBasis& b, std::size_t planes, const double* in, double* out,
                      double scale) {
  RowMat t = RowMat::Zero(planes * b.h, 2 * b.nc);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t u = 0; u < b.nr; ++u) {
      const cd* th = &b.th[u * b.h];
      const double* zu = in + 2 * (p * b.nr + u) * b.nc;
      for (std::size_t y = 0; y < b.h; ++y) {
        // in * conj(th)
        const double tr = th[y].real(), ti = -th[y].imag();
        for (std::size_t v = 0; v < b.nc; ++v) {
          const double ar = zu[2 * v], ai = zu[2 * v + 1];
          t(p * b.h + y, v) += ar * tr - ai * ti;
          t(p * b.h + y, b.nc + v) += ar * ti + ai * tr;
        }
      }
    }
  // Re(a conj(e)) = a_r e_r + a_i e_i
  RowMap(out, planes * b.h, b.w).noalias() += scale * (t * b.cols.transpose());
}

}  // namespace

Tensor window_dft(const Tensor& x, const Window& win) {
  const auto g = real_geometry(x.shape());
  auto basis = std::make_shared<WindowBasis>(window_basis(g.h, g.w, win));
  const std::size_t nwin = basis->nr * basis->nc;
  Shape out_shape(x.shape().begin(), x.shape().end() - 2);
  out_shape.insert(out_shape.end(), {basis->nr, basis->nc, 2});
  const auto in = x.data();
  for (double v : in)
    require(std::isfinite(v), ErrorCode::kNumeric, "window_dft: non-finite input");
  std::vector<double> out(g.planes * nwin * 2);
  window_analysis(*basis, g.planes, in.data(), out.data(), 1.0);
  return make_result(out_shape, std::move(out), {x}, [g, basis](detail::Node& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    window_synthesis(*basis, g.planes, self.grad.data(), gx->data(), 1.0);
  });
}

Tensor window_idft_real(const Tensor& z, std::size_t h, std::size_t w, const Window& win) {
  auto basis = std::make_shared<WindowBasis>(window_basis(h, w, win));
  const auto g = complex_geometry(z.shape());
  require(g.h == basis->nr && g.w == basis->nc, ErrorCode::kShape,
          "window_idft_real: spectrum does not match the window");
  const std::size_t hw = h * w, nwin = basis->nr * basis->nc;
  const double norm = 1.0 / static_cast<double>(hw);
  Shape out_shape(z.shape().begin(), z.shape().end() - 3);
  out_shape.insert(out_shape.end(), {h, w});
  std::vector<double> out(g.planes * hw, 0.0);
  window_synthesis(*basis, g.planes, z.data().data(), out.data(), norm);
  return make_result(out_shape, std::move(out), {z},
                     [g, basis, nwin, norm](detail::Node& self) {
                       auto* gz = parent_grad(self, 0);
                       if (!gz) return;
                       std::vector<double> part(g.planes * nwin * 2);
                       window_analysis(*basis, g.planes, self.grad.data(), part.data(), norm);
                       for (std::size_t i = 0; i < part.size(); ++i) (*gz)[i] += part[i];
                     });
}

Spectrum fft2_centered(const Tensor& x) {
  const Tensor z = fft2_centered_complex(x);
  return Spectrum{complex_abs(z), complex_angle(z), true};
}

Tensor ifft2_centered(const Spectrum& s) {
  require(s.shifted, ErrorCode::kInvalidArgument,
          "ifft2_centered expects a centered spectrum");
  require(s.amplitude.shape() == s.phase.shape(), ErrorCode::kShape,
          "amplitude/phase shape mismatch");
  return ifft2_centered_complex(polar(s.amplitude, s.phase));
}

}  // namespace partscreen::spectral
