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
 * Description: Segment conditioning ahead of feature extraction: static gain
 * control, Butterworth band-pass (cascaded biquads) and superflux onset
 * detection with peak picking.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "coughdet/audio.hpp"
#include "coughdet/error.hpp"
#include "coughdet/mfcc.hpp"

namespace coughdet {

struct PreprocessConfig {
  double band_low_hz = 150.0;
  double band_high_hz = 2000.0;
  double agc_target_rms = 0.1;
  double onset_threshold = 0.5;
  int filter_order = 4;  // Butterworth prototype order; the band-pass has twice this

  void validate() const {
    if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < kSampleRateHz / 2.0)) {
      throw Error(ErrorKind::InvalidBand, "need 0 < low < high < 8000 Hz, got " + std::to_string(band_low_hz) +
                                              ".." + std::to_string(band_high_hz));
    }
    if (filter_order < 1) throw Error(ErrorKind::InvalidBand, "filter_order must be >= 1");
    if (!(onset_threshold > 0.0)) throw Error(ErrorKind::InvalidConfig, "onset_threshold must be > 0");
    if (!(agc_target_rms > 0.0 && agc_target_rms <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "agc_target_rms must be in (0, 1]");
    }
  }

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

inline double rms(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

/// Single whole-segment gain to reach the target RMS over the real samples,
/// capped so that no sample exceeds unit magnitude. Silence passes through.
inline AudioSegment agc(const AudioSegment& segment, const PreprocessConfig& config) {
  const auto real = segment.real_samples();
  const double level = rms(real);
  if (level == 0.0) return segment;
  double peak = 0.0;
  for (float v : real) peak = std::max(peak, std::abs(static_cast<double>(v)));
  const double gain = std::min(config.agc_target_rms / level, 1.0 / peak);
  AudioSegment out = segment;
  for (std::size_t i = 0; i < real.size(); ++i) {
    out.samples[i] = static_cast<float>(static_cast<double>(real[i]) * gain);
  }
  return out;
}

/// Direct-form-II-transposed second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double omega) const {
    const std::complex<double> z1 = std::polar(1.0, -omega);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }
};

/// Butterworth band-pass designed by low-pass -> band-pass transformation of
/// the analog prototype followed by the bilinear transform with prewarped
/// edges. Each section has zeros at z = +1 and z = -1 and is scaled to unit
/// gain at the geometric centre frequency.
class BandPassFilter {
 public:
  explicit BandPassFilter(const PreprocessConfig& config) {
    config.validate();
    const double fs = kSampleRateHz;
    const double k = 2.0 * fs;
    const double wl = k * std::tan(std::numbers::pi * config.band_low_hz / fs);
    const double wh = k * std::tan(std::numbers::pi * config.band_high_hz / fs);
    const double bw = wh - wl;
    const double w0sq = wl * wh;
    centre_omega_ = 2.0 * std::atan(std::sqrt(w0sq) / k);

    const int n = config.filter_order;
    std::vector<std::complex<double>> upper;  // band-pass poles with Im > 0
    std::vector<double> real_poles;
    for (int i = 0; i < n; ++i) {
      const std::complex<double> proto =
          std::polar(1.0, std::numbers::pi * (2.0 * i + n + 1) / (2.0 * n));
      const std::complex<double> half = proto * bw / 2.0;
      const std::complex<double> root = std::sqrt(half * half - w0sq);
      for (const auto& s : {half + root, half - root}) {
        const std::complex<double> z = (k + s) / (k - s);
        if (std::abs(z.imag()) < 1e-12 * std::abs(z)) {
          real_poles.push_back(z.real());
        } else if (z.imag() > 0.0) {
          upper.push_back(z);
        }
      }
    }
    for (const auto& p : upper) {
      add_section(-2.0 * p.real(), std::norm(p));
    }
    std::sort(real_poles.begin(), real_poles.end());
    for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
      add_section(-(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]);
    }
  }

  std::span<const Biquad> sections() const { return sections_; }
  double centre_omega() const { return centre_omega_; }

  /// Complex response of the full cascade at normalized angular frequency.
  std::complex<double> response(double omega) const {
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= s.response(omega);
    return h;
  }

  /// Filters from rest (zero initial state).
  std::vector<float> apply(std::span<const float> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;
      for (double& v : y) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return std::vector<float>(y.begin(), y.end());
  }

 private:
  void add_section(double a1, double a2) {
    Biquad s{1.0, 0.0, -1.0, a1, a2};
    const double g = 1.0 / std::abs(s.response(centre_omega_));
    s.b0 *= g;
    s.b2 *= g;
    sections_.push_back(s);
  }

  std::vector<Biquad> sections_;
  double centre_omega_ = 0.0;
};

/// Band-pass over the real samples only; the zero-padded tail stays zero.
inline AudioSegment band_pass(const AudioSegment& segment, const BandPassFilter& filter) {
  AudioSegment out = segment;
  const auto y = filter.apply(segment.real_samples());
  std::copy(y.begin(), y.end(), out.samples.begin());
  return out;
}

inline AudioSegment band_pass(const AudioSegment& segment, const PreprocessConfig& config) {
  return band_pass(segment, BandPassFilter(config));
}

struct OnsetSample {
  double time_s = 0.0;
  double strength = 0.0;
};

struct OnsetPeak {
  double time_s = 0.0;
  double strength = 0.0;

  friend bool operator==(const OnsetPeak&, const OnsetPeak&) = default;
};

inline constexpr std::size_t kSuperfluxMaxFilterBands = 3;
inline constexpr std::size_t kSuperfluxLag = 1;

/// Superflux onset detection function on the MFCC frame grid. Each frame's
/// floored log-mel spectrum is compared against the frame `kSuperfluxLag`
/// earlier after a 3-band maximum filter along frequency; positive
/// differences are summed. Frames with no predecessor compare against
/// silence. Time stamps are frame centres.
inline std::vector<OnsetSample> onset_strength(const AudioSegment& segment, const MfccExtractor& extractor) {
  const Matrix spec = extractor.log_mel_spectrogram(segment);
  const auto& cfg = extractor.config();
  const double hop_s = static_cast<double>(cfg.hop_samples()) / kSampleRateHz;
  const double half_frame_s = static_cast<double>(cfg.frame_samples()) / (2.0 * kSampleRateHz);
  const std::size_t bands = spec.cols;
  const std::size_t reach = kSuperfluxMaxFilterBands / 2;
  const double silence = std::log(kLogFloor);

  std::vector<OnsetSample> out(spec.rows);
  std::vector<double> reference(bands);
  for (std::size_t t = 0; t < spec.rows; ++t) {
    if (t < kSuperfluxLag) {
      std::fill(reference.begin(), reference.end(), silence);
    } else {
      const auto prev = spec.row(t - kSuperfluxLag);
      for (std::size_t b = 0; b < bands; ++b) {
        const std::size_t lo = b >= reach ? b - reach : 0;
        const std::size_t hi = std::min(bands - 1, b + reach);
        reference[b] = *std::max_element(prev.begin() + static_cast<std::ptrdiff_t>(lo),
                                         prev.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
      }
    }
    double flux = 0.0;
    const auto cur = spec.row(t);
    for (std::size_t b = 0; b < bands; ++b) flux += std::max(0.0, cur[b] - reference[b]);
    out[t] = {static_cast<double>(t) * hop_s + half_frame_s, flux};
  }
  return out;
}

inline std::vector<OnsetSample> onset_strength(const AudioSegment& segment, const MfccConfig& config = {}) {
  return onset_strength(segment, MfccExtractor(config));
}

/// Local maxima strictly above `threshold`. A plateau counts as one peak,
/// reported at its first sample, if it is strictly higher than the samples
/// on either side of it; sequence ends only need to beat their one neighbour.
inline std::vector<OnsetPeak> pick_peaks(std::span<const OnsetSample> strengths, double threshold) {
  std::vector<OnsetPeak> peaks;
  const std::size_t n = strengths.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && strengths[j + 1].strength == strengths[i].strength) ++j;
    const double v = strengths[i].strength;
    const bool above_left = i == 0 || v > strengths[i - 1].strength;
    const bool above_right = j + 1 == n || v > strengths[j + 1].strength;
    if (above_left && above_right && v > threshold) peaks.push_back({strengths[i].time_s, v});
    i = j + 1;
  }
  return peaks;
}

/// Onset strengths normalized by the segment maximum (when positive) and
/// peak-picked against `config.onset_threshold`.
inline std::vector<OnsetPeak> detect_onsets(const AudioSegment& segment, const PreprocessConfig& config,
                                            const MfccExtractor& extractor) {
  auto strengths = onset_strength(segment, extractor);
  double top = 0.0;
  for (const auto& s : strengths) top = std::max(top, s.strength);
  if (top > 0.0) {
    for (auto& s : strengths) s.strength /= top;
  }
  return pick_peaks(strengths, config.onset_threshold);
}

}  // namespace coughdet
