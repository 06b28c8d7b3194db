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
 * Description: End-to-end wiring. Per 1 s segment:
 *   AGC -> band-pass -> onset gate -> MFCC -> CNN -> event consolidation
 * Segments without an onset peak are never shown to the model and score 0.
 */

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coughdet/audio.hpp"
#include "coughdet/cnn.hpp"
#include "coughdet/crc32.hpp"
#include "coughdet/events.hpp"
#include "coughdet/mfcc.hpp"
#include "coughdet/preprocess.hpp"
#include "coughdet/quantize.hpp"
#include "coughdet/weights.hpp"

namespace coughdet {

struct PipelineConfig {
  PreprocessConfig preprocess;
  MfccConfig mfcc;
  std::string weights_path;
  double decision_threshold = 0.5;
  double merge_window_s = 0.4;
  double tail_s = 0.45;

  ConsolidationParams consolidation() const { return {decision_threshold, merge_window_s, tail_s}; }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct ConfigField {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidConfig, key + ": not a number: '" + text + "'");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidConfig, key + ": not an integer: '" + text + "'");
  }
  return v;
}

inline const std::vector<ConfigField>& config_fields() {
#define COUGHDET_DOUBLE_FIELD(name, member)                                                  \
  ConfigField {                                                                             \
    name, [](const PipelineConfig& c) { return shortest(c.member); },                       \
        [](PipelineConfig& c, const std::string& v) { c.member = parse_double(name, v); }   \
  }
#define COUGHDET_INT_FIELD(name, member, type)                                                          \
  ConfigField {                                                                                        \
    name, [](const PipelineConfig& c) { return std::to_string(c.member); },                            \
        [](PipelineConfig& c, const std::string& v) { c.member = static_cast<type>(parse_int(name, v)); } \
  }
  static const std::vector<ConfigField> fields{
      COUGHDET_DOUBLE_FIELD("band_low_hz", preprocess.band_low_hz),
      COUGHDET_DOUBLE_FIELD("band_high_hz", preprocess.band_high_hz),
      COUGHDET_DOUBLE_FIELD("agc_target_rms", preprocess.agc_target_rms),
      COUGHDET_DOUBLE_FIELD("onset_threshold", preprocess.onset_threshold),
      COUGHDET_INT_FIELD("filter_order", preprocess.filter_order, int),
      COUGHDET_INT_FIELD("n_mfcc", mfcc.n_mfcc, int),
      COUGHDET_INT_FIELD("n_mel_filters", mfcc.n_mel_filters, int),
      COUGHDET_DOUBLE_FIELD("frame_length_ms", mfcc.frame_length_ms),
      COUGHDET_DOUBLE_FIELD("overlap_pct", mfcc.overlap_pct),
      COUGHDET_INT_FIELD("fft_size", mfcc.fft_size, std::size_t),
      COUGHDET_DOUBLE_FIELD("fmin_hz", mfcc.fmin_hz),
      COUGHDET_DOUBLE_FIELD("fmax_hz", mfcc.fmax_hz),
      ConfigField{"weights_path", [](const PipelineConfig& c) { return c.weights_path; },
                  [](PipelineConfig& c, const std::string& v) { c.weights_path = v; }},
      COUGHDET_DOUBLE_FIELD("decision_threshold", decision_threshold),
      COUGHDET_DOUBLE_FIELD("merge_window_s", merge_window_s),
      COUGHDET_DOUBLE_FIELD("tail_s", tail_s),
  };
#undef COUGHDET_DOUBLE_FIELD
#undef COUGHDET_INT_FIELD
  return fields;
}

}  // namespace detail

/// Flat `key = value` text, one setting per line; `#` starts a comment.
/// fft_size 0 means "derive from the frame length".
inline std::string dump_config(const PipelineConfig& config) {
  std::string out = "# coughdet pipeline configuration\n";
  for (const auto& f : detail::config_fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

/// Applies the settings in `text` on top of `base`.
inline PipelineConfig parse_config(const std::string& text, PipelineConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    bool known = false;
    for (const auto& f : detail::config_fields()) {
      if (key == f.key) {
        f.set(base, value);
        known = true;
        break;
      }
    }
    if (!known) throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return base;
}

/// CRC-32 of the canonical dump, excluding the weights path.
inline std::string config_fingerprint(const PipelineConfig& config) {
  PipelineConfig c = config;
  c.weights_path.clear();
  const std::string text = dump_config(c);
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x",
                crc32(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())));
  return buf;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline ModelWeights load_weights_file(const std::string& path) {
  try {
    return load_weights(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

struct SegmentResult {
  SegmentVerdict verdict;
  bool inferred = false;  // false when the onset gate skipped the model
};

/// Stateless per-segment processing against one immutable weights instance.
class SegmentPipeline {
 public:
  SegmentPipeline(const PipelineConfig& config, ModelWeights weights)
      : config_(config), weights_(std::move(weights)), filter_(config.preprocess), extractor_(config.mfcc) {
    config_.preprocess.validate();
    weights_.validate();
    if (config_.mfcc.n_frames() != weights_.input_shape[1] ||
        static_cast<std::uint32_t>(config_.mfcc.n_mfcc) != weights_.input_shape[0]) {
      throw Error(ErrorKind::ConfigMismatch,
                  "features would be " + std::to_string(config_.mfcc.n_mfcc) + "x" +
                      std::to_string(config_.mfcc.n_frames()) + " but weights expect " +
                      shape_string(weights_.input_shape));
    }
  }

  const PipelineConfig& config() const { return config_; }
  const ModelWeights& weights() const { return weights_; }
  const MfccExtractor& extractor() const { return extractor_; }

  AudioSegment condition(const AudioSegment& segment) const {
    return band_pass(agc(segment, config_.preprocess), filter_);
  }

  SegmentResult process(const AudioSegment& segment) const {
    SegmentResult r;
    r.verdict.segment_index = segment.index;
    const AudioSegment clean = condition(segment);
    r.verdict.onset_peaks = detect_onsets(clean, config_.preprocess, extractor_);
    if (r.verdict.onset_peaks.empty()) return r;
    const MfccMatrix features = extractor_.compute(clean);
    ForwardOptions opts;
    opts.decision_threshold = config_.decision_threshold;
    r.verdict.probability = infer(features, weights_, opts).probability;
    r.inferred = true;
    return r;
  }

 private:
  PipelineConfig config_;
  ModelWeights weights_;
  BandPassFilter filter_;
  MfccExtractor extractor_;
};

struct DetectionReport {
  std::string source;
  std::string config_fingerprint;
  std::size_t segment_count = 0;
  std::vector<SegmentVerdict> verdicts;
  std::vector<CoughEvent> events;
};

/// Streams a WAV one segment at a time: only the current segment, the
/// filter design and the open event are resident.
inline DetectionReport detect_stream(std::istream& in, const std::string& source, const SegmentPipeline& pipeline,
                                     bool keep_verdicts = false) {
  DetectionReport report;
  report.source = source;
  report.config_fingerprint = config_fingerprint(pipeline.config());
  std::uint64_t offset = 0;
  try {
    WavReader reader(in);
    EventConsolidator consolidator(pipeline.config().consolidation());
    for (std::size_t k = 0;; ++k) {
      offset = reader.offset();
      const auto block = reader.read(kSegmentSamples);
      if (block.empty()) break;
      const auto result = pipeline.process(make_segment(block, k));
      if (auto e = consolidator.push(result.verdict)) report.events.push_back(*e);
      if (keep_verdicts) report.verdicts.push_back(result.verdict);
      ++report.segment_count;
      if (block.size() < kSegmentSamples) break;
    }
    if (auto e = consolidator.finish()) report.events.push_back(*e);
    if (report.segment_count == 0) throw Error(ErrorKind::EmptyStream, "no samples in data chunk");
  } catch (const Error& e) {
    throw Error(e.kind(), source + " (byte offset " + std::to_string(offset) + "): " + e.detail());
  }
  return report;
}

inline DetectionReport detect_file(const std::string& path, const SegmentPipeline& pipeline,
                                   bool keep_verdicts = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return detect_stream(in, path, pipeline, keep_verdicts);
}

inline constexpr std::size_t kFeatureHeaderBytes = 16;

/// "MFC1" | n_mfcc u32 | n_frames u32 | segment index u32 | float32 row-major values.
inline std::vector<std::uint8_t> encode_features(const MfccMatrix& m, std::uint32_t segment_index = 0) {
  detail::ByteWriter w;
  w.bytes("MFC1", 4);
  w.u32(static_cast<std::uint32_t>(m.n_mfcc));
  w.u32(static_cast<std::uint32_t>(m.n_frames));
  w.u32(segment_index);
  for (float v : m.coefficients) w.f32(v);
  return std::move(w.buffer());
}

inline MfccMatrix decode_features(std::span<const std::uint8_t> bytes, std::uint32_t* segment_index = nullptr) {
  detail::ByteReader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), "MFC1", 4) != 0) throw Error(ErrorKind::BadMagic, "expected \"MFC1\"");
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  const std::uint32_t index = r.u32();
  if (segment_index) *segment_index = index;
  MfccMatrix m(rows, cols, MfccConfig{});
  for (auto& v : m.coefficients) v = r.f32();
  return m;
}

}  // namespace coughdet
