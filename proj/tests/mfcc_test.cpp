// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"

using namespace coughdet;
using namespace coughdet::testing;

TEST(Mel, KnownPoints) {
  EXPECT_EQ(hz_to_mel(0.0), 0.0);
  EXPECT_NEAR(hz_to_mel(700.0), 781.172839, 1e-6);
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(hz_to_mel(8000.0), 2840.023047, 1e-6);
  EXPECT_EQ(mel_to_hz(0.0), 0.0);
  EXPECT_NEAR(mel_to_hz(2595.0), 6300.0, 1e-9);
}

TEST(Mel, RoundTrip) {
  for (double f : {1.0, 100.0, 1000.0, 7999.0}) EXPECT_LE(relative_error(mel_to_hz(hz_to_mel(f)), f), 1e-9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 8000.0);
  for (int i = 0; i < 2000; ++i) {
    const double f = u(rng);
    EXPECT_LE(std::abs(mel_to_hz(hz_to_mel(f)) - f), 1e-9 * std::max(f, 1.0));
  }
}

TEST(Mel, NegativeInputsThrow) {
  EXPECT_THROW(hz_to_mel(-1.0), Error);
  EXPECT_THROW(mel_to_hz(-1.0), Error);
}

TEST(Filterbank, RowsAreNonNegativeUnimodalAndOrdered) {
  MfccConfig cfg;
  cfg.fft_size = 512;
  const auto fb = build_mel_filterbank(cfg);
  ASSERT_EQ(fb.rows, 40u);
  ASSERT_EQ(fb.cols, 257u);
  std::size_t last_peak = 0;
  for (std::size_t j = 0; j < fb.rows; ++j) {
    const auto r = fb.row(j);
    const auto peak = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    for (std::size_t k = 0; k < r.size(); ++k) {
      EXPECT_GE(r[k], 0.0);
      if (k > 0 && k <= peak) {
        EXPECT_GE(r[k], r[k - 1]) << j;
      }
      if (k > peak) {
        EXPECT_LE(r[k], r[k - 1]) << j;
      }
    }
    if (j > 0) {
      EXPECT_GE(peak, last_peak);
    }
    last_peak = peak;
  }
  const auto edges = mel_band_edges_hz(cfg);
  for (std::size_t p = 1; p < edges.size(); ++p) EXPECT_GT(edges[p], edges[p - 1]);
}

TEST(Filterbank, FirstPeakBinNearestFirstCentre) {
  MfccConfig cfg;
  cfg.fft_size = 512;
  const auto fb = build_mel_filterbank(cfg);
  const double centre = mel_to_hz(hz_to_mel(8000.0) / 41.0);
  const auto r = fb.row(0);
  const auto peak = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  std::size_t nearest = 0;
  double best = 1e300;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double d = std::abs(static_cast<double>(k) * 16000.0 / 512.0 - centre);
    if (d < best) best = d, nearest = k;
  }
  EXPECT_EQ(peak, nearest);
}

TEST(Filterbank, TooSmallFftIsDegenerate) {
  MfccConfig cfg;
  cfg.fft_size = 128;
  try {
    build_mel_filterbank(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateFilter);
  }
}

TEST(Framing, FrameCounts) {
  EXPECT_EQ(MfccConfig::with_frame(5, 25).n_frames(), 267u);
  EXPECT_EQ(MfccConfig::with_frame(35, 0).n_frames(), 29u);
  EXPECT_EQ(MfccConfig::with_frame(70, 25).n_frames(), 20u);
}

TEST(Framing, InvalidConfigs) {
  EXPECT_THROW(MfccConfig::with_frame(0, 0).validate(), Error);
  EXPECT_THROW(MfccConfig::with_frame(5, 100).validate(), Error);
  EXPECT_THROW(MfccConfig::with_frame(5.03, 0).validate(), Error);
  MfccConfig c;
  c.n_mfcc = 41;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.fft_size = 300;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Framing, SegmentOfWrongLengthIsRejected) {
  AudioSegment s;
  s.samples.resize(100);
  EXPECT_THROW(frame_signal(s, MfccConfig{}), Error);
}

TEST(Mfcc, ShapeForEverySweepRow) {
  AudioSegment s = make_segment(sine(16000, 700.0), 0);
  for (double ms : {5.0, 20.0, 35.0, 50.0, 70.0}) {
    for (double ov : {0.0, 25.0}) {
      const auto cfg = MfccConfig::with_frame(ms, ov);
      const auto m = mfcc(s, cfg);
      EXPECT_EQ(m.n_mfcc, 40u);
      EXPECT_EQ(m.n_frames, cfg.n_frames());
      EXPECT_EQ(m.coefficients.size(), 40u * cfg.n_frames());
    }
  }
}

TEST(Mfcc, SilentColumnsAreIdentical) {
  const auto m = mfcc(make_segment(silence(16000), 0), MfccConfig{});
  for (std::size_t t = 1; t < m.n_frames; ++t) {
    for (std::size_t i = 0; i < m.n_mfcc; ++i) ASSERT_EQ(m.at(i, t), m.at(i, 0));
  }
}

TEST(Mfcc, SineEnergyPeaksAtNearestFilter) {
  for (double ms : {20.0, 35.0}) {
    const MfccExtractor ex(MfccConfig::with_frame(ms, 0));
    const auto frames = frame_signal(make_segment(sine(16000, 1000.0), 0), ex.config());
    const auto e = ex.mel_energies(frames[3]);
    const auto edges = mel_band_edges_hz(ex.config());
    std::size_t nearest = 0;
    for (std::size_t j = 1; j < e.size(); ++j) {
      if (std::abs(edges[j + 1] - 1000.0) < std::abs(edges[nearest + 1] - 1000.0)) nearest = j;
    }
    // Brute-force energy per filter from the oracle spectrum.
    const auto power = dft_power(frames[3], ex.config().resolved_fft_size());
    std::vector<double> oracle(e.size(), 0.0);
    for (std::size_t j = 0; j < e.size(); ++j) {
      for (std::size_t k = 0; k < power.size(); ++k) oracle[j] += ex.filterbank().at(j, k) * power[k];
      EXPECT_LE(std::abs(e[j] - oracle[j]), 1e-6 * std::max(oracle[j], 1e-9));
    }
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin()), nearest) << ms;
  }
}

TEST(Cepstrum, ConstantEnergiesGiveZeroCoefficients) {
  for (double e : {1e-3, 1.0, 42.0}) {
    const auto c = cepstral_coefficients(std::vector<double>(40, e), 40);
    for (double v : c) EXPECT_NEAR(v, 0.0, 1e-12);
    const auto o = cepstrum_oracle(std::vector<double>(40, e));
    for (double v : o) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Cepstrum, MatchesLiteralDoubleLoop) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-12.0, 4.0);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> x(40);
    for (auto& v : x) v = std::exp(u(rng));
    const auto got = cepstral_coefficients(x, 40);
    const auto want = cepstrum_oracle(x);
    double scale = 0.0;
    for (double v : want) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < 40; ++i) EXPECT_LE(std::abs(got[i] - want[i]), 1e-9 * scale);
  }
}

TEST(Cepstrum, ZeroEnergyIsFloored) {
  const auto c = cepstral_coefficients(std::vector<double>(40, 0.0), 40);
  for (double v : c) EXPECT_TRUE(std::isfinite(v));
}

TEST(Mfcc, Deterministic) {
  auto x = sine(16000, 300.0, 0.2);
  add_burst(x, 4000);
  const auto s = make_segment(x, 0);
  EXPECT_EQ(mfcc(s, MfccConfig{}), mfcc(s, MfccConfig{}));
}
