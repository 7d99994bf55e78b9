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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "oracles.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "tensor/spectral.hpp"

namespace partscreen::spectral {
namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(SpectralTest, ConstantMapIsDcOnly) {
  const double c = 1.75;
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {5, 3}, {6, 8}}) {
    auto x = Tensor::full({1, h, w}, c);
    auto s = fft2_centered(x);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double a = s.amplitude.at(i * w + j);
        if (i == h / 2 && j == w / 2) {
          EXPECT_NEAR(a, c * h * w, 1e-9);
          EXPECT_NEAR(s.phase.at(i * w + j), 0.0, 1e-12);
        } else {
          EXPECT_NEAR(a, 0.0, 1e-9);
        }
      }
  }
}

TEST(SpectralTest, MatchesDirectDftOracle) {
  Rng rng(21);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {6, 5}, {4, 8}}) {
    auto xs = oracle::random_vector(rng, h * w);
    auto s = fft2_centered(Tensor::from_data({1, h, w}, xs));
    auto ref = oracle::centered_dft(xs, h, w);
    for (std::size_t k = 0; k < h * w; ++k) {
      EXPECT_NEAR(s.amplitude.at(k), std::abs(ref[k]), 1e-6);
      if (std::abs(ref[k]) > 1e-9) {
        const double d = std::remainder(s.phase.at(k) - std::arg(ref[k]),
                                        2.0 * std::numbers::pi);
        EXPECT_NEAR(d, 0.0, 1e-6);
      }
    }
  }
}

TEST(SpectralTest, InverseMatchesDirectOracle) {
  // Hand-built 4x4 spectrum of a real signal: conjugate-symmetric bins.
  const std::size_t h = 4, w = 4;
  std::vector<std::complex<double>> spec(h * w, 0.0);
  spec[2 * 4 + 2] = 3.0;                      // DC
  spec[2 * 4 + 3] = {1.0, 0.5};               // (0, +1)
  spec[2 * 4 + 1] = {1.0, -0.5};              // (0, -1)
  spec[3 * 4 + 2] = {-0.25, 2.0};             // (+1, 0)
  spec[1 * 4 + 2] = {-0.25, -2.0};            // (-1, 0)
  spec[0 * 4 + 0] = 0.75;                     // Nyquist corner, self-conjugate
  std::vector<double> amp(h * w), ph(h * w);
  for (std::size_t k = 0; k < h * w; ++k) {
    amp[k] = std::abs(spec[k]);
    ph[k] = std::arg(spec[k]);
  }
  Spectrum s{Tensor::from_data({1, h, w}, amp), Tensor::from_data({1, h, w}, ph), true};
  auto x = ifft2_centered(s);
  auto ref = oracle::centered_idft(spec, h, w);
  for (std::size_t k = 0; k < h * w; ++k) {
    EXPECT_NEAR(x.at(k), ref[k].real(), 1e-6);
    EXPECT_NEAR(ref[k].imag(), 0.0, 1e-12);
  }
}

TEST(SpectralTest, ZeroAmplitudeInvertsToZero) {
  Rng rng(1);
  Spectrum s{Tensor::zeros({2, 4, 6}),
             Tensor::from_data({2, 4, 6}, oracle::random_vector(rng, 48, -3, 3)), true};
  auto x = ifft2_centered(s);
  for (double v : x.data()) EXPECT_EQ(v, 0.0);
}

TEST(SpectralTest, RoundTripAndParsevalProperty) {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t c = 1 + rng.below(4), h = 1 + rng.below(12), w = 1 + rng.below(12);
    auto xs = oracle::random_vector(rng, c * h * w, -2, 2);
    auto x = Tensor::from_data({c, h, w}, xs);
    auto s = fft2_centered(x);
    auto back = ifft2_centered(s);
    EXPECT_LT(max_abs_diff(back.data(), x.data()), 1e-5) << c << "x" << h << "x" << w;
    double e = 0.0, ea = 0.0;
    for (double v : xs) e += v * v;
    for (double a : s.amplitude.data()) ea += a * a;
    EXPECT_NEAR(ea / double(h * w), e, 1e-4 * e);
    for (double a : s.amplitude.data()) EXPECT_GE(a, 0.0);
  }
}

TEST(SpectralTest, RejectsNonFiniteInput) {
  auto x = Tensor::from_data({1, 2, 2}, {0.0, NAN, 1.0, 2.0});
  EXPECT_THROW(fft2_centered(x), Error);
}

TEST(SpectralTest, RejectsCorruptedSpectrum) {
  // A single non-DC bin without its conjugate partner has a complex inverse.
  std::vector<double> amp(16, 0.0), ph(16, 0.0);
  amp[2 * 4 + 3] = 1.0;
  ph[2 * 4 + 3] = 0.3;
  Spectrum s{Tensor::from_data({1, 4, 4}, amp), Tensor::from_data({1, 4, 4}, ph), true};
  EXPECT_THROW(ifft2_centered(s), Error);
  Spectrum unshifted{s.amplitude, s.phase, false};
  EXPECT_THROW(ifft2_centered(unshifted), Error);
}

TEST(SpectralTest, ConjugateIndexIsInvolution) {
  for (std::size_t n : {1u, 2u, 5u, 8u})
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(conjugate_index(conjugate_index(i, n), n), i);
      const long f = frequency_of(i, n), g = frequency_of(conjugate_index(i, n), n);
      EXPECT_EQ(((f + g) % long(n) + long(n)) % long(n), 0);
    }
}

TEST(SpectralTest, GradientsThroughAmplitudeAndPhase) {
  Rng rng(4);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {3, 5}}) {
    auto x = Tensor::from_data({2, h, w}, oracle::random_vector(rng, 2 * h * w));
    auto wa = oracle::random_vector(rng, 2 * h * w);
    auto wp = oracle::random_vector(rng, 2 * h * w);
    // Phases of self-conjugate bins sit at 0 or +-pi and may flip sign under
    // rounding; leave them out of the probe.
    for (std::size_t k = 0; k < 2 * h * w; ++k) {
      const std::size_t i = (k / w) % h, j = k % w;
      if (conjugate_index(i, h) == i && conjugate_index(j, w) == j) wp[k] = 0.0;
    }
    auto r = check_gradients(
        [&](const std::vector<Tensor>& in) {
          auto s = fft2_centered(in[0]);
          return ops::add(ops::dot_const(s.amplitude, wa),
                          ops::dot_const(ops::tanh(s.phase), wp));
        },
        {x});
    EXPECT_LT(r.max_rel_error, 1e-4);
    auto wx = oracle::random_vector(rng, 2 * h * w);
    r = check_gradients(
        [&](const std::vector<Tensor>& in) {
          return ops::dot_const(ifft2_centered(fft2_centered(ops::square(in[0]))), wx);
        },
        {x});
    EXPECT_LT(r.max_rel_error, 1e-4);
  }
}

TEST(SpectralTest, WindowDftMatchesFullTransformBlock) {
  Rng rng(5);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {5, 6}, {32, 32}}) {
    auto x = Tensor::from_data({3, h, w}, oracle::random_vector(rng, 3 * h * w));
    const Window win{h / 2 - 1, h / 2 + 2 <= h ? h / 2 + 2 : h, w / 2 - 1, w / 2 + 1};
    auto full = fft2_centered_complex(x);
    auto part = window_dft(x, win);
    ASSERT_EQ(part.shape(), (Shape{3, win.rows(), win.cols(), 2}));
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t i = 0; i < win.rows(); ++i)
        for (std::size_t j = 0; j < win.cols(); ++j)
          for (std::size_t c = 0; c < 2; ++c) {
            const double a = part.at(((p * win.rows() + i) * win.cols() + j) * 2 + c);
            const double b =
                full.at(((p * h + win.row_begin + i) * w + win.col_begin + j) * 2 + c);
            EXPECT_NEAR(a, b, 1e-10);
          }
  }
}

TEST(SpectralTest, WindowInverseMatchesZeroPaddedInverse) {
  Rng rng(6);
  const std::size_t h = 8, w = 8;
  auto x = Tensor::from_data({2, h, w}, oracle::random_vector(rng, 2 * h * w));
  const Window win{3, 6, 3, 6};
  auto z = window_dft(x, win);
  // Zero-padded spectrum through the full inverse.
  auto full = fft2_centered_complex(x);
  std::vector<double> padded(full.numel(), 0.0);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t i = win.row_begin; i < win.row_end; ++i)
      for (std::size_t j = win.col_begin; j < win.col_end; ++j)
        for (std::size_t c = 0; c < 2; ++c) {
          const std::size_t k = ((p * h + i) * w + j) * 2 + c;
          padded[k] = full.at(k);
        }
  auto expect = ifft2_centered_complex(Tensor::from_data(full.shape(), padded));
  auto got = window_idft_real(z, h, w, win);
  EXPECT_LT(max_abs_diff(got.data(), expect.data()), 1e-12);
}

TEST(SpectralTest, WindowTransformGradients) {
  Rng rng(7);
  const std::size_t h = 6, w = 5;
  const Window win{2, 5, 1, 4};
  auto x = Tensor::from_data({2, h, w}, oracle::random_vector(rng, 2 * h * w));
  auto wz = oracle::random_vector(rng, 2 * win.rows() * win.cols() * 2);
  auto r = check_gradients(
      [&](const std::vector<Tensor>& in) {
        return ops::dot_const(ops::square(window_dft(in[0], win)), wz);
      },
      {x});
  EXPECT_LT(r.max_rel_error, 1e-4);
  auto z = Tensor::from_data({2, win.rows(), win.cols(), 2}, oracle::random_vector(rng, wz.size()));
  auto wx = oracle::random_vector(rng, 2 * h * w);
  r = check_gradients(
      [&](const std::vector<Tensor>& in) {
        return ops::dot_const(ops::square(window_idft_real(in[0], h, w, win)), wx);
      },
      {z});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

}  // namespace
}  // namespace partscreen::spectral
