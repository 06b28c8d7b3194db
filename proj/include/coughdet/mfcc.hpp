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

/*
 * Description: Mel scale, triangular filterbank and the cepstral transform
 * producing the fixed (n_mfcc x n_frames) feature image for a 1 s segment.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "coughdet/audio.hpp"
#include "coughdet/error.hpp"
#include "coughdet/spectral.hpp"

namespace coughdet {

inline constexpr double kLogFloor = 1e-10;
inline constexpr std::size_t kMinFilterbankFft = 512;

inline double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw Error(ErrorKind::NegativeFrequency, "frequency " + std::to_string(hz) + " Hz");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw Error(ErrorKind::NegativeMel, "mel value " + std::to_string(mel));
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// Frame/hop parameters for one row of the frame-length sweep. `fft_size` 0
/// selects the default: the next power of two >= the frame, but never below
/// 512 so that 40 filters over 0-8 kHz each keep at least one FFT bin.
struct MfccConfig {
  int n_mfcc = 40;
  int n_mel_filters = 40;
  double frame_length_ms = 5.0;
  double overlap_pct = 25.0;
  std::size_t fft_size = 0;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;

  static MfccConfig with_frame(double frame_ms, double overlap) {
    MfccConfig c;
    c.frame_length_ms = frame_ms;
    c.overlap_pct = overlap;
    return c;
  }

  double hop_ms() const { return frame_length_ms * (1.0 - overlap_pct / 100.0); }

  std::size_t frame_samples() const {
    return static_cast<std::size_t>(std::lround(frame_length_ms * kSampleRateHz / 1000.0));
  }

  std::size_t hop_samples() const {
    return static_cast<std::size_t>(std::lround(hop_ms() * kSampleRateHz / 1000.0));
  }

  /// ceil(1000 / hop_ms), evaluated on the integer sample grid.
  std::size_t n_frames() const {
    const std::size_t hop = hop_samples();
    return (kSegmentSamples + hop - 1) / hop;
  }

  std::size_t resolved_fft_size() const {
    if (fft_size != 0) return fft_size;
    return std::max(next_power_of_two(frame_samples()), kMinFilterbankFft);
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (n_mel_filters < 1) fail("n_mel_filters must be >= 1");
    if (n_mfcc < 1 || n_mfcc > n_mel_filters) fail("n_mfcc must be in [1, n_mel_filters]");
    if (!(frame_length_ms > 0.0)) fail("frame_length_ms must be > 0");
    if (!(overlap_pct >= 0.0 && overlap_pct < 100.0)) fail("overlap_pct must be in [0, 100)");
    const double frame = frame_length_ms * kSampleRateHz / 1000.0;
    const double hop = hop_ms() * kSampleRateHz / 1000.0;
    if (std::abs(frame - std::round(frame)) > 1e-9 || std::abs(hop - std::round(hop)) > 1e-9 ||
        hop_samples() == 0) {
      fail("frame and hop must be whole sample counts at 16 kHz");
    }
    if (frame_samples() > kSegmentSamples) fail("frame longer than a segment");
    if (!is_power_of_two(resolved_fft_size()) || resolved_fft_size() < frame_samples()) {
      fail("fft_size must be a power of two >= the frame length");
    }
    if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz)) fail("need 0 <= fmin_hz < fmax_hz");
    if (fmax_hz > kSampleRateHz / 2.0) fail("fmax_hz exceeds Nyquist");
  }

  friend bool operator==(const MfccConfig&, const MfccConfig&) = default;
};

/// Row-major dense matrix of doubles; rows x cols.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data).subspan(r * cols, cols); }
};

/// Feature image: coefficient i of frame t is at(i, t).
struct MfccMatrix {
  std::size_t n_mfcc = 0;
  std::size_t n_frames = 0;
  std::vector<float> coefficients;  // row-major (n_mfcc, n_frames)
  MfccConfig config;

  MfccMatrix() = default;
  MfccMatrix(std::size_t rows, std::size_t cols, const MfccConfig& cfg)
      : n_mfcc(rows), n_frames(cols), coefficients(rows * cols, 0.0f), config(cfg) {}

  float& at(std::size_t i, std::size_t t) { return coefficients[i * n_frames + t]; }
  float at(std::size_t i, std::size_t t) const { return coefficients[i * n_frames + t]; }

  friend bool operator==(const MfccMatrix&, const MfccMatrix&) = default;
};

/// n_mel_filters + 2 band edges in Hz, equally spaced in mel between fmin and
/// fmax. Filter j is centred on edge j+1.
inline std::vector<double> mel_band_edges_hz(const MfccConfig& config) {
  const double lo = hz_to_mel(config.fmin_hz);
  const double hi = hz_to_mel(config.fmax_hz);
  const auto n = static_cast<std::size_t>(config.n_mel_filters);
  std::vector<double> edges(n + 2);
  for (std::size_t p = 0; p < edges.size(); ++p) {
    edges[p] = mel_to_hz(lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(n + 1));
  }
  return edges;
}

/// (n_mel_filters x fft/2+1) triangular weights. Filter j peaks at edge j+1 and
/// reaches zero at edges j and j+2.
inline Matrix build_mel_filterbank(const MfccConfig& config) {
  config.validate();
  const std::size_t fft = config.resolved_fft_size();
  const std::size_t bins = fft / 2 + 1;
  const auto edges = mel_band_edges_hz(config);
  Matrix fb(static_cast<std::size_t>(config.n_mel_filters), bins);
  for (std::size_t j = 0; j < fb.rows; ++j) {
    const double left = edges[j], centre = edges[j + 1], right = edges[j + 2];
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * kSampleRateHz / static_cast<double>(fft);
      double w = 0.0;
      if (f > left && f <= centre) {
        w = (f - left) / (centre - left);
      } else if (f > centre && f < right) {
        w = (right - f) / (right - centre);
      }
      fb.at(j, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      throw Error(ErrorKind::DegenerateFilter,
                  "mel filter " + std::to_string(j) + " (centre " + std::to_string(centre) +
                      " Hz) covers no bin of a " + std::to_string(fft) +
                      "-point FFT; fft_size too small for " + std::to_string(config.n_mel_filters) +
                      " filters");
    }
  }
  return fb;
}

/// Hann-windowed analysis frames at hop spacing; frames running past the end
/// of the segment are zero-filled.
inline std::vector<std::vector<double>> frame_signal(const AudioSegment& segment, const MfccConfig& config) {
  config.validate();
  if (segment.samples.size() != kSegmentSamples) {
    throw Error(ErrorKind::ConfigMismatch, "segment holds " + std::to_string(segment.samples.size()) +
                                               " samples, expected " + std::to_string(kSegmentSamples));
  }
  const std::size_t len = config.frame_samples();
  const std::size_t hop = config.hop_samples();
  const auto window = hann_window(len);
  std::vector<std::vector<double>> frames(config.n_frames(), std::vector<double>(len, 0.0));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < len && start + i < kSegmentSamples; ++i) {
      frames[t][i] = static_cast<double>(segment.samples[start + i]) * window[i];
    }
  }
  return frames;
}

/// Cosine basis for the cepstral transform: entry (i-1, j-1) holds
/// sqrt(2/N) * cos(i*pi*(j - 0.5)/N), i = 1..n_coeffs, j = 1..N.
class CepstralBasis {
 public:
  CepstralBasis(std::size_t n_coeffs, std::size_t n_filters) : basis_(n_coeffs, n_filters) {
    const double n = static_cast<double>(n_filters);
    const double norm = std::sqrt(2.0 / n);
    for (std::size_t i = 1; i <= n_coeffs; ++i) {
      for (std::size_t j = 1; j <= n_filters; ++j) {
        basis_.at(i - 1, j - 1) =
            norm * std::cos(static_cast<double>(i) * std::numbers::pi * (static_cast<double>(j) - 0.5) / n);
      }
    }
  }

  std::size_t n_coeffs() const { return basis_.rows; }
  std::size_t n_filters() const { return basis_.cols; }

  std::vector<double> apply(std::span<const double> log_energies) const {
    if (log_energies.size() != basis_.cols) {
      throw Error(ErrorKind::ConfigMismatch, "expected " + std::to_string(basis_.cols) + " log energies, got " +
                                                 std::to_string(log_energies.size()));
    }
    std::vector<double> out(basis_.rows, 0.0);
    for (std::size_t i = 0; i < basis_.rows; ++i) {
      const auto r = basis_.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * log_energies[j];
      out[i] = acc;
    }
    return out;
  }

 private:
  Matrix basis_;
};

inline double floored_log(double energy) { return std::log(std::max(energy, kLogFloor)); }

/// Coefficients 1..n_coeffs from raw (non-log) filterbank energies.
inline std::vector<double> cepstral_coefficients(std::span<const double> energies, std::size_t n_coeffs) {
  std::vector<double> logs(energies.size());
  std::transform(energies.begin(), energies.end(), logs.begin(), floored_log);
  return CepstralBasis(n_coeffs, energies.size()).apply(logs);
}

/// Reusable feature extractor; owns the FFT plan, window, filterbank and
/// cosine basis so repeated segments skip setup.
class MfccExtractor {
 public:
  explicit MfccExtractor(const MfccConfig& config)
      : config_((config.validate(), config)),
        fft_(config.resolved_fft_size()),
        filterbank_(build_mel_filterbank(config)),
        basis_(static_cast<std::size_t>(config.n_mfcc), static_cast<std::size_t>(config.n_mel_filters)) {}

  const MfccConfig& config() const { return config_; }
  const Matrix& filterbank() const { return filterbank_; }
  const Fft& fft() const { return fft_; }

  std::vector<double> mel_energies(std::span<const double> windowed_frame) const {
    const auto power = fft_.power_spectrum(windowed_frame);
    std::vector<double> energies(filterbank_.rows, 0.0);
    for (std::size_t j = 0; j < filterbank_.rows; ++j) {
      const auto w = filterbank_.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * power[k];
      energies[j] = acc;
    }
    return energies;
  }

  /// Floored natural-log mel energies, one row per frame (n_frames x n_mel).
  Matrix log_mel_spectrogram(const AudioSegment& segment) const {
    const auto frames = frame_signal(segment, config_);
    Matrix out(frames.size(), filterbank_.rows);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto e = mel_energies(frames[t]);
      for (std::size_t j = 0; j < e.size(); ++j) out.at(t, j) = floored_log(e[j]);
    }
    return out;
  }

  MfccMatrix compute(const AudioSegment& segment) const {
    return from_log_mel(log_mel_spectrogram(segment));
  }

  MfccMatrix from_log_mel(const Matrix& log_mel) const {
    MfccMatrix m(basis_.n_coeffs(), log_mel.rows, config_);
    for (std::size_t t = 0; t < log_mel.rows; ++t) {
      const auto c = basis_.apply(log_mel.row(t));
      for (std::size_t i = 0; i < c.size(); ++i) m.at(i, t) = static_cast<float>(c[i]);
    }
    return m;
  }

 private:
  MfccConfig config_;
  Fft fft_;
  Matrix filterbank_;
  CepstralBasis basis_;
};

inline MfccMatrix mfcc(const AudioSegment& segment, const MfccConfig& config) {
  return MfccExtractor(config).compute(segment);
}

}  // namespace coughdet
