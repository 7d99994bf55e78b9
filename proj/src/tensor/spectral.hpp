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

#ifndef PARTSCREEN_TENSOR_SPECTRAL_HPP_
#define PARTSCREEN_TENSOR_SPECTRAL_HPP_

#include <complex>
#include <cstddef>
#include <span>

#include "tensor/tensor.hpp"

// Centered 2D discrete Fourier transform on the trailing two axes.
//
// Conventions:
//  - forward is unnormalized, inverse carries the 1/(H*W) factor;
//  - "centered" puts frequency 0 at shifted index (H/2, W/2) (integer
//    division), so shifted index i holds frequency i - H/2 (mod H). For even
//    sizes the Nyquist row/column lands at index 0 and has no mirror partner
//    inside the array.
//  - complex tensors are real tensors with a trailing axis of size 2
//    holding (re, im).
namespace partscreen::spectral {

// Frequency index of shifted position i along an axis of length n.
long frequency_of(std::size_t i, std::size_t n);
// Shifted index of the conjugate (negated) frequency of shifted index i.
std::size_t conjugate_index(std::size_t i, std::size_t n);

// In-place 2D transform of one h*w plane (row-major). Radix-2 for power-of-two
// extents, direct summation otherwise. Unnormalized in both directions.
void dft2_plane(std::span<std::complex<double>> plane, std::size_t h,
                std::size_t w, bool inverse);

// x: [..., H, W] real -> [..., H, W, 2] centered spectrum.
Tensor fft2_centered_complex(const Tensor& x);
// z: [..., H, W, 2] centered spectrum -> [..., H, W] real part of the inverse.
// Rejects spectra whose inverse has an imaginary residue above
// 1e-4 * max|real| (such a spectrum cannot come from a real feature map).
Tensor ifft2_centered_complex(const Tensor& z);

Tensor complex_abs(const Tensor& z);
Tensor complex_angle(const Tensor& z);
Tensor polar(const Tensor& amplitude, const Tensor& phase);

struct Spectrum {
  Tensor amplitude;  // [..., H, W], >= 0
  Tensor phase;      // [..., H, W], radians
  bool shifted = true;
};

// Per-plane amplitude/phase of the centered DFT; differentiable.
Spectrum fft2_centered(const Tensor& x);
// Real spatial map from a centered spectrum; differentiable in amplitude and
// phase.
Tensor ifft2_centered(const Spectrum& s);

// Rectangular block of shifted spectrum indices.
struct Window {
  std::size_t row_begin = 0, row_end = 0, col_begin = 0, col_end = 0;
  std::size_t rows() const { return row_end - row_begin; }
  std::size_t cols() const { return col_end - col_begin; }
};

// Centered spectrum of x[..., H, W] on the window only, by direct summation:
// [..., R, C, 2]. Matches the corresponding block of fft2_centered_complex.
Tensor window_dft(const Tensor& x, const Window& win);
// Real part of the inverse transform (with the 1/(H*W) factor) of a spectrum
// that is zero outside the window. z: [..., R, C, 2] -> [..., H, W].
Tensor window_idft_real(const Tensor& z, std::size_t h, std::size_t w,
                        const Window& win);

constexpr double kImaginaryResidueTolerance = 1e-4;

}  // namespace partscreen::spectral

#endif  // PARTSCREEN_TENSOR_SPECTRAL_HPP_
