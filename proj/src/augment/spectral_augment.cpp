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

#include "augment/spectral_augment.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace partscreen::augment {

namespace {

void check_fraction(double r) {
  require(r > 0.0 && r <= 1.0, ErrorCode::kInvalidArgument,
          "low-frequency fraction r must lie in (0, 1], got " +
              std::to_string(r));
}

struct Planes {
  std::size_t planes, channels, h, w;
};

Planes planes_of(const Shape& s) {
  require(s.size() >= 3, ErrorCode::kShape,
          "expected [..., C, H, W], got " + shape_str(s));
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  return {numel_of(s) / (h * w), s[s.size() - 3], h, w};
}

void axis_window(std::size_t d, double r, std::size_t& begin,
                 std::size_t& end) {
  const long rho = std::max(1L, std::lround(r * static_cast<double>(d)));
  const std::size_t half = static_cast<std::size_t>(rho / 2);
  const std::size_t c = d / 2;
  begin = c - std::min(half, c);
  end = std::min(d, c + half + 1);
}

}  // namespace

LowFreqRegion LowFreqRegion::centered(std::size_t height, std::size_t width,
                                      double r) {
  check_fraction(r);
  require(height >= 1 && width >= 1, ErrorCode::kShape, "empty spectrum");
  LowFreqRegion reg;
  reg.height_ = height;
  reg.width_ = width;
  reg.r_ = r;
  axis_window(height, r, reg.row_begin_, reg.row_end_);
  axis_window(width, r, reg.col_begin_, reg.col_end_);
  return reg;
}

LowFreqRegion LowFreqRegion::whole(std::size_t height, std::size_t width) {
  require(height >= 1 && width >= 1, ErrorCode::kShape, "empty spectrum");
  LowFreqRegion reg;
  reg.height_ = reg.row_end_ = height;
  reg.width_ = reg.col_end_ = width;
  reg.r_ = 1.0;
  return reg;
}

DropMask draw_drop_mask(const Shape& shape, double r, double p, Rng& rng) {
  check_fraction(r);
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidArgument,
          "drop probability p must lie in [0, 1], got " + std::to_string(p));
  require(shape.size() >= 2, ErrorCode::kShape, "mask needs [..., H, W]");
  const std::size_t h = shape[shape.size() - 2], w = shape[shape.size() - 1];
  const auto region = LowFreqRegion::centered(h, w, r);
  DropMask mask{shape, std::vector<double>(numel_of(shape), 1.0)};
  const std::size_t planes = mask.keep.size() / (h * w);
  for (std::size_t pl = 0; pl < planes; ++pl) {
    double* m = &mask.keep[pl * h * w];
    for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
      for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
        const std::size_t flat = i * w + j;
        const std::size_t partner = spectral::conjugate_index(i, h) * w +
                                    spectral::conjugate_index(j, w);
        if (partner < flat)
          m[flat] = m[partner];
        else
          m[flat] = rng.bernoulli(1.0 - p) ? 1.0 : 0.0;
      }
  }
  return mask;
}

spectral::Spectrum dropout_spectrum(const spectral::Spectrum& s,
                                    const DropMask& mask) {
  require(mask.shape == s.amplitude.shape(), ErrorCode::kShape,
          "drop mask shape " + shape_str(mask.shape) + " vs amplitude " +
              shape_str(s.amplitude.shape()));
  const Tensor m = Tensor::from_data(mask.shape, mask.keep);
  return spectral::Spectrum{ops::mul(s.amplitude, m), s.phase, s.shifted};
}

Tensor lf_dropout(const Tensor& x, const DropMask& mask) {
  return spectral::ifft2_centered(
      dropout_spectrum(spectral::fft2_centered(x), mask));
}

Tensor lf_dropout(const Tensor& x, double r, double p, Rng& rng) {
  const DropMask mask = draw_drop_mask(x.shape(), r, p, rng);
  return lf_dropout(x, mask);
}

void population_stats(std::span<const double> values, double& mu,
                      double& sigma) {
  require(!values.empty(), ErrorCode::kShape, "statistics of empty set");
  double s = 0.0;
  for (double v : values) s += v;
  mu = s / static_cast<double>(values.size());
  double q = 0.0;
  for (double v : values) q += (v - mu) * (v - mu);
  sigma = std::sqrt(q / static_cast<double>(values.size()));
}

LFStats lowfreq_stats(const Tensor& amplitude, double r) {
  const auto g = planes_of(amplitude.shape());
  const auto region = LowFreqRegion::centered(g.h, g.w, r);
  const auto a = amplitude.data();
  LFStats stats;
  std::vector<double> vals;
  vals.reserve(region.size());
  for (std::size_t p = 0; p < g.planes; ++p) {
    vals.clear();
    for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
      for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
        const double v = a[p * g.h * g.w + i * g.w + j];
        require(v >= 0.0, ErrorCode::kInvalidArgument,
                "lowfreq_stats: negative amplitude");
        vals.push_back(v);
      }
    double mu = 0.0, sigma = 0.0;
    population_stats(vals, mu, sigma);
    stats.mu.push_back(mu);
    stats.sigma.push_back(sigma);
  }
  return stats;
}

Tensor adain_lowfreq(const Tensor& amplitude, const LowFreqRegion& region,
                     const Tensor& noise_mu, const Tensor& noise_sigma,
                     std::span<const double> z_mu,
                     std::span<const double> z_sigma) {
  const auto g = planes_of(amplitude.shape());
  require(region.height() == g.h && region.width() == g.w, ErrorCode::kShape,
          "region does not match amplitude extent");
  require(noise_mu.numel() == g.channels && noise_sigma.numel() == g.channels,
          ErrorCode::kShape, "noise scales must have one entry per channel");
  require(z_mu.size() == g.planes && z_sigma.size() == g.planes,
          ErrorCode::kShape, "need one z draw per (sample, channel)");
  const auto a = amplitude.data();
  const auto smu = noise_mu.data(), ssig = noise_sigma.data();
  for (std::size_t c = 0; c < g.channels; ++c)
    require(std::isfinite(smu[c]) && std::isfinite(ssig[c]) && smu[c] >= 0.0 &&
                ssig[c] >= 0.0,
            ErrorCode::kInvalidArgument, "noise scales must be finite and >= 0");

  const std::size_t hw = g.h * g.w;
  const double n = static_cast<double>(region.size());
  std::vector<double> out(a.begin(), a.end());
  // Per plane: mu, sigma, effective sigma, gamma, beta.
  struct PlaneStats {
    double mu, sigma, sigma_eff, gamma, beta;
  };
  std::vector<PlaneStats> st(g.planes);
  for (std::size_t p = 0; p < g.planes; ++p) {
    const double* ap = &a[p * hw];
    double s = 0.0;
    for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
      for (std::size_t j = region.col_begin(); j < region.col_end(); ++j)
        s += ap[i * g.w + j];
    const double mu = s / n;
    double q = 0.0;
    for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
      for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
        const double d = ap[i * g.w + j] - mu;
        q += d * d;
      }
    const double sigma = std::sqrt(q / n);
    const double sigma_eff = std::max(sigma, kSigmaFloor);
    const std::size_t c = p % g.channels;
    const double beta = mu + smu[c] * z_mu[p];
    const double gamma = sigma + ssig[c] * z_sigma[p];
    require(std::isfinite(sigma_eff) && sigma_eff > 0.0 &&
                std::isfinite(beta) && std::isfinite(gamma),
            ErrorCode::kNumeric, "adain_lowfreq: degenerate statistics");
    st[p] = {mu, sigma, sigma_eff, gamma, beta};
    double* op = &out[p * hw];
    for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
      for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
        const std::size_t k = i * g.w + j;
        op[k] = gamma * (ap[k] - mu) / sigma_eff + beta;
      }
  }

  std::vector<double> zm(z_mu.begin(), z_mu.end());
  std::vector<double> zs(z_sigma.begin(), z_sigma.end());
  return make_result(
      amplitude.shape(), std::move(out), {amplitude, noise_mu, noise_sigma},
      [g, region, n, st = std::move(st), zm = std::move(zm),
       zs = std::move(zs)](detail::Node& self) {
        const auto& a = self.parents[0]->value;
        auto* ga = parent_grad(self, 0);
        auto* gmu = parent_grad(self, 1);
        auto* gsig = parent_grad(self, 2);
        const std::size_t hw = g.h * g.w;
        for (std::size_t p = 0; p < g.planes; ++p) {
          const double* gp = &self.grad[p * hw];
          const double* ap = &a[p * hw];
          const auto& s = st[p];
          double d_beta = 0.0, d_gamma = 0.0;
          for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
            for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
              const std::size_t k = i * g.w + j;
              d_beta += gp[k];
              d_gamma += gp[k] * (ap[k] - s.mu) / s.sigma_eff;
            }
          const std::size_t c = p % g.channels;
          if (gmu) (*gmu)[c] += d_beta * zm[p];
          if (gsig) (*gsig)[c] += d_gamma * zs[p];
          if (!ga) continue;
          double* dst = &(*ga)[p * hw];
          for (std::size_t k = 0; k < hw; ++k) dst[k] += gp[k];
          // Inside the region replace the pass-through by the AdaIN Jacobian.
          const double mean_g = d_beta / n;
          const double ratio = s.gamma / s.sigma_eff;
          const bool floored = !(s.sigma > kSigmaFloor);
          for (std::size_t i = region.row_begin(); i < region.row_end(); ++i)
            for (std::size_t j = region.col_begin(); j < region.col_end(); ++j) {
              const std::size_t k = i * g.w + j;
              // d sigma / d a_k; subgradient 0 at sigma == 0.
              const double dsig =
                  s.sigma > 0.0 ? (ap[k] - s.mu) / (n * s.sigma) : 0.0;
              const double through_sigma =
                  d_gamma * dsig * (floored ? 1.0 : 1.0 - ratio);
              dst[k] += -gp[k] + ratio * (gp[k] - mean_g) + through_sigma + mean_g;
            }
        }
      });
}

spectral::Spectrum uncert_spectrum(const spectral::Spectrum& s, double r,
                                   const Tensor& noise_mu,
                                   const Tensor& noise_sigma,
                                   std::span<const double> z_mu,
                                   std::span<const double> z_sigma) {
  const auto g = planes_of(s.amplitude.shape());
  const auto region = LowFreqRegion::centered(g.h, g.w, r);
  return spectral::Spectrum{
      adain_lowfreq(s.amplitude, region, noise_mu, noise_sigma, z_mu, z_sigma),
      s.phase, s.shifted};
}

Tensor lf_uncert(const Tensor& x, const Tensor& noise_mu,
                 const Tensor& noise_sigma, double r,
                 std::span<const double> z_mu, std::span<const double> z_sigma) {
  return spectral::ifft2_centered(uncert_spectrum(
      spectral::fft2_centered(x), r, noise_mu, noise_sigma, z_mu, z_sigma));
}

Tensor lf_uncert_windowed(const Tensor& x, const Tensor& noise_mu,
                          const Tensor& noise_sigma, double r,
                          std::span<const double> z_mu,
                          std::span<const double> z_sigma) {
  const auto g = planes_of(x.shape());
  const auto region = LowFreqRegion::centered(g.h, g.w, r);
  const spectral::Window win{region.row_begin(), region.row_end(), region.col_begin(),
                             region.col_end()};
  const Tensor z = spectral::window_dft(x, win);
  const Tensor amp = spectral::complex_abs(z);
  const Tensor phase = spectral::complex_angle(z);
  const Tensor edited =
      adain_lowfreq(amp, LowFreqRegion::whole(win.rows(), win.cols()), noise_mu,
                    noise_sigma, z_mu, z_sigma);
  const Tensor delta = spectral::polar(ops::sub(edited, amp), phase);
  return ops::add(x, spectral::window_idft_real(delta, g.h, g.w, win));
}

NoiseScales::NoiseScales(const std::vector<std::size_t>& channels,
                         double init_scale) {
  const double raw = inverse_softplus(init_scale);
  for (auto c : channels) {
    raw_mu_.push_back(Tensor::full({c}, raw, true));
    raw_sigma_.push_back(Tensor::full({c}, raw, true));
  }
}

Tensor NoiseScales::sigma_mu(std::size_t l) const {
  return ops::softplus(raw_mu_.at(l));
}
Tensor NoiseScales::sigma_sigma(std::size_t l) const {
  return ops::softplus(raw_sigma_.at(l));
}

std::vector<Tensor> NoiseScales::parameters() const {
  std::vector<Tensor> ps;
  for (std::size_t l = 0; l < raw_mu_.size(); ++l) {
    ps.push_back(raw_mu_[l]);
    ps.push_back(raw_sigma_[l]);
  }
  return ps;
}

double NoiseScales::inverse_softplus(double scale) {
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::kInvalidArgument,
          "noise scale must be positive");
  return scale > 30.0 ? scale : std::log(std::expm1(scale));
}

}  // namespace partscreen::augment
