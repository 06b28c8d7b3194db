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

// Fixtures shared by the unit and acceptance tests.

#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "coughdet/coughdet.hpp"

namespace coughdet::testing {

inline std::vector<float> silence(std::size_t n) { return std::vector<float>(n, 0.0f); }

inline std::vector<float> sine(std::size_t n, double hz, double amplitude = 0.5) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRateHz));
  }
  return x;
}

/// Decaying tone-plus-noise burst added to `x` starting at `start`.
inline void add_burst(std::vector<float>& x, std::size_t start, std::uint64_t seed = 1, double amplitude = 0.6,
                      std::size_t length = 2400) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < length && start + i < x.size(); ++i) {
    const double t = static_cast<double>(i) / kSampleRateHz;
    const double v = amplitude * std::exp(-30.0 * t) * (0.5 * u(rng) + std::sin(2.0 * std::numbers::pi * 400.0 * t));
    x[start + i] = static_cast<float>(std::clamp(static_cast<double>(x[start + i]) + v, -1.0, 0.999));
  }
}

inline std::vector<std::uint8_t> wav_bytes(const std::vector<float>& samples) {
  AudioStream s;
  s.samples = samples;
  return serialize_wav(s);
}

/// Minimal RIFF writer with arbitrary header fields, for malformed inputs.
inline std::vector<std::uint8_t> custom_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                            std::uint16_t bits, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto str = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  str("RIFF");
  detail::put_u32le(out, static_cast<std::uint32_t>(36 + data.size()));
  str("WAVE");
  str("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, format);
  detail::put_u16le(out, channels);
  detail::put_u32le(out, rate);
  detail::put_u32le(out, rate * channels * bits / 8);
  detail::put_u16le(out, static_cast<std::uint16_t>(channels * bits / 8));
  detail::put_u16le(out, bits);
  str("data");
  detail::put_u32le(out, static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("coughdet-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout; stderr is folded in when asked.
inline CommandResult run(const std::string& command, bool merge_stderr = false) {
  CommandResult r;
  const std::string cmd = command + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Features drawn uniformly from [-2, 2].
inline MfccMatrix random_features(std::mt19937_64& rng, std::size_t n_frames = kDefaultInputFrames) {
  std::uniform_real_distribution<float> u(-2.0f, 2.0f);
  MfccMatrix m(kInputMfcc, n_frames, MfccConfig{});
  for (auto& v : m.coefficients) v = u(rng);
  return m;
}

/// Seeded weights whose dense bias is set to minus the median logit over
/// `features`, so decisions split roughly evenly between the classes.
inline ModelWeights calibrated_weights(std::uint64_t seed, const std::vector<MfccMatrix>& features) {
  ModelWeights w = init_weights(seed);
  std::vector<double> logits;
  for (const auto& f : features) logits.push_back(forward(f, w).logit);
  std::nth_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(logits.size() / 2), logits.end());
  w.dense_bias.f32[0] -= static_cast<float>(logits[logits.size() / 2]);
  return w;
}

/// Direct O(n^2) DFT power spectrum of a zero-padded frame.
inline std::vector<double> dft_power(const std::vector<double>& frame, std::size_t n) {
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < frame.size(); ++t) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += frame[t] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[k] = std::norm(acc);
  }
  return out;
}

/// Literal double loop over c_i = sqrt(2/N) * sum_j log(x_j) cos(i*pi*(j-0.5)/N), i = 1..N.
inline std::vector<double> cepstrum_oracle(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      sum += std::log(x[j - 1]) *
             std::cos(static_cast<double>(i) * std::numbers::pi * (static_cast<double>(j) - 0.5) / static_cast<double>(n));
    }
    c[i - 1] = std::sqrt(2.0 / static_cast<double>(n)) * sum;
  }
  return c;
}

/// Brute-force stride-2 valid convolution with ReLU; kernel is (3, 3, C, F).
inline Activation conv_oracle(const Activation& in, const std::vector<float>& kernel, const std::vector<float>& bias) {
  const std::size_t f = bias.size();
  const std::size_t oh = (in.h - 3) / 2 + 1, ow = (in.w - 3) / 2 + 1;
  Activation out(oh, ow, f);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      for (std::size_t o = 0; o < f; ++o) {
        double acc = bias[o];
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            for (std::size_t c = 0; c < in.c; ++c) {
              acc += static_cast<double>(in.at(2 * y + ky, 2 * x + kx, c)) * kernel[((ky * 3 + kx) * in.c + c) * f + o];
            }
          }
        }
        out.at(y, x, o) = static_cast<float>(std::max(acc, 0.0));
      }
    }
  }
  return out;
}

inline double relative_error(double got, double want, double floor = 1e-12) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace coughdet::testing
