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

#ifndef PARTSCREEN_AUGMENT_SPECTRAL_AUGMENT_HPP_
#define PARTSCREEN_AUGMENT_SPECTRAL_AUGMENT_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "common/random.hpp"
#include "tensor/spectral.hpp"
#include "tensor/tensor.hpp"

// Low-frequency feature augmentations operating on the centered amplitude
// spectrum of feature maps: random dropout of low-frequency amplitudes and
// AdaIN-style resampling of their channel statistics.
namespace partscreen::augment {

// Centered low-frequency window of a shifted h x w spectrum.
//
// With rho_d = max(1, round(r * d)), the window keeps shifted indices whose
// offset from the center d/2 is at most rho_d / 2, clipped to the array. The
// window is therefore closed under frequency negation, so a symmetric edit
// of the amplitudes keeps the spectrum of a real map conjugate-symmetric.
class LowFreqRegion {
 public:
  static LowFreqRegion centered(std::size_t height, std::size_t width,
                                double r);
  static LowFreqRegion whole(std::size_t height, std::size_t width);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t row_begin() const { return row_begin_; }
  std::size_t row_end() const { return row_end_; }
  std::size_t col_begin() const { return col_begin_; }
  std::size_t col_end() const { return col_end_; }
  std::size_t rows() const { return row_end_ - row_begin_; }
  std::size_t cols() const { return col_end_ - col_begin_; }
  std::size_t size() const { return rows() * cols(); }
  double fraction() const { return r_; }

  bool contains(std::size_t i, std::size_t j) const {
    return i >= row_begin_ && i < row_end_ && j >= col_begin_ && j < col_end_;
  }

 private:
  std::size_t height_ = 0, width_ = 0;
  std::size_t row_begin_ = 0, row_end_ = 0, col_begin_ = 0, col_end_ = 0;
  double r_ = 0.0;
};

// Binary mask over [..., H, W]: ones outside the region; inside it one
// Bernoulli(1 - p) draw per conjugate pair of bins, per plane.
struct DropMask {
  Shape shape;
  std::vector<double> keep;
};

DropMask draw_drop_mask(const Shape& shape, double r, double p, Rng& rng);

// M (.) A with phase untouched; returns the edited spectrum (pre-inversion).
spectral::Spectrum dropout_spectrum(const spectral::Spectrum& s,
                                    const DropMask& mask);

// Inverse transform of the masked spectrum of x.
Tensor lf_dropout(const Tensor& x, const DropMask& mask);
Tensor lf_dropout(const Tensor& x, double r, double p, Rng& rng);

struct LFStats {
  std::vector<double> mu;     // one per plane
  std::vector<double> sigma;  // population std, one per plane
};

// Mean and population standard deviation of a set of values.
void population_stats(std::span<const double> values, double& mu,
                      double& sigma);

// Per-plane statistics of amplitude[..., H, W] over the low-frequency region.
LFStats lowfreq_stats(const Tensor& amplitude, double r);

constexpr double kSigmaFloor = 1e-5;

// Differentiable AdaIN on the region of amplitude [B, C, H, W]:
//   out = gamma * (A - mu) / max(sigma, floor) + beta inside the region,
//   beta = mu + noise_mu[c] * z_mu[b,c], gamma = sigma + noise_sigma[c] * z_sigma[b,c],
// A unchanged outside. Gradients reach amplitude, noise_mu and noise_sigma;
// z_* are constants of length B*C.
Tensor adain_lowfreq(const Tensor& amplitude, const LowFreqRegion& region,
                     const Tensor& noise_mu, const Tensor& noise_sigma,
                     std::span<const double> z_mu,
                     std::span<const double> z_sigma);

spectral::Spectrum uncert_spectrum(const spectral::Spectrum& s, double r,
                                   const Tensor& noise_mu,
                                   const Tensor& noise_sigma,
                                   std::span<const double> z_mu,
                                   std::span<const double> z_sigma);

// x: [B, C, H, W] (or [C, H, W], treated as B = 1). noise_*: [C] positive
// scales. z_*: B*C standard-normal draws.
Tensor lf_uncert(const Tensor& x, const Tensor& noise_mu,
                 const Tensor& noise_sigma, double r,
                 std::span<const double> z_mu, std::span<const double> z_sigma);

// lf_uncert evaluated on the region coefficients alone, as
// x + inverse(edited - original). Agrees with lf_uncert to rounding.
Tensor lf_uncert_windowed(const Tensor& x, const Tensor& noise_mu,
                          const Tensor& noise_sigma, double r,
                          std::span<const double> z_mu,
                          std::span<const double> z_sigma);

// Learnable per-block noise scales, kept as unconstrained parameters and
// exposed through softplus.
class NoiseScales {
 public:
  NoiseScales() = default;
  NoiseScales(const std::vector<std::size_t>& channels, double init_scale);

  std::size_t blocks() const { return raw_mu_.size(); }
  Tensor& raw_mu(std::size_t l) { return raw_mu_.at(l); }
  Tensor& raw_sigma(std::size_t l) { return raw_sigma_.at(l); }
  const Tensor& raw_mu(std::size_t l) const { return raw_mu_.at(l); }
  const Tensor& raw_sigma(std::size_t l) const { return raw_sigma_.at(l); }

  // softplus(raw); differentiable.
  Tensor sigma_mu(std::size_t l) const;
  Tensor sigma_sigma(std::size_t l) const;

  std::vector<Tensor> parameters() const;

  // raw value whose softplus equals `scale` (> 0).
  static double inverse_softplus(double scale);

 private:
  std::vector<Tensor> raw_mu_;
  std::vector<Tensor> raw_sigma_;
};

}  // namespace partscreen::augment

#endif  // PARTSCREEN_AUGMENT_SPECTRAL_AUGMENT_HPP_
