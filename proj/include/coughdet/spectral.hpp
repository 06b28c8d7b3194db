/*
 * Copyright 2026 The coughdet Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the License); you may
 * not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an AS IS BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "coughdet/error.hpp"

namespace coughdet {

inline constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline constexpr std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal.
class Fft {
 public:
  explicit Fft(std::size_t size) : size_(size), bitrev_(size), twiddle_(size / 2) {
    if (!is_power_of_two(size)) {
      throw Error(ErrorKind::InvalidConfig, "FFT size must be a power of two, got " + std::to_string(size));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    for (std::size_t k = 0; k < size / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
      twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return size_; }

  void transform(std::span<std::complex<double>> x) const {
    for (std::size_t i = 0; i < size_; ++i) {
      if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = size_ / len;
      for (std::size_t start = 0; start < size_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const auto t = twiddle_[k * stride] * x[start + k + half];
          x[start + k + half] = x[start + k] - t;
          x[start + k] += t;
        }
      }
    }
  }

  /// |X_k|^2 for k = 0..size/2 of `frame` zero-padded to size().
  std::vector<double> power_spectrum(std::span<const double> frame) const {
    if (frame.size() > size_) {
      throw Error(ErrorKind::ConfigMismatch, "frame of " + std::to_string(frame.size()) +
                                                 " samples exceeds FFT size " + std::to_string(size_));
    }
    std::vector<std::complex<double>> buf(size_);
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
    transform(buf);
    std::vector<double> power(size_ / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
    return power;
  }

 private:
  std::size_t size_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

}  // namespace coughdet
