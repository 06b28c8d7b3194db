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
 * Description: Static memory and arithmetic accounting for feature
 * configurations and the classifier, derived from shapes only.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "coughdet/cnn.hpp"
#include "coughdet/mfcc.hpp"
#include "coughdet/quantize.hpp"
#include "coughdet/weights.hpp"

namespace coughdet {

inline constexpr double kDefaultScratchKb = 8.4;
// Published estimates, printed next to the computed figures for comparison.
inline constexpr double kPublishedMacs = 13.26e6;
inline constexpr double kPublishedAdds = 3.26e3;

struct BudgetReport {
  double frame_length_ms = 0.0;
  double overlap_pct = 0.0;
  double hop_ms = 0.0;
  std::size_t n_frames = 0;
  std::size_t total_mfcc_coefficients = 0;
  double mfcc_memory_kb = 0.0;
  double preprocessing_memory_kb = 0.0;
  std::size_t param_count = 0;
  double weights_memory_kb_float = 0.0;
  double weights_memory_kb_int8 = 0.0;
  std::uint64_t mac_count = 0;
  std::uint64_t add_count = 0;
};

/// Frame/hop arithmetic in milliseconds: hop = frame * (1 - overlap),
/// frames = ceil(1000 / hop), 4 bytes per coefficient.
inline BudgetReport mfcc_budget(const MfccConfig& config, double scratch_kb = kDefaultScratchKb) {
  BudgetReport r;
  r.frame_length_ms = config.frame_length_ms;
  r.overlap_pct = config.overlap_pct;
  r.hop_ms = config.hop_ms();
  if (!(r.hop_ms > 0.0)) throw Error(ErrorKind::InvalidConfig, "hop must be positive");
  r.n_frames = static_cast<std::size_t>(std::ceil(1000.0 / r.hop_ms - 1e-9));
  r.total_mfcc_coefficients = static_cast<std::size_t>(config.n_mfcc) * r.n_frames;
  r.mfcc_memory_kb = static_cast<double>(r.total_mfcc_coefficients) * 4.0 / 1024.0;
  r.preprocessing_memory_kb = r.mfcc_memory_kb + scratch_kb;
  return r;
}

/// Layer dimensions the arithmetic counts depend on.
struct NetworkShape {
  std::size_t input_h = kInputMfcc;
  std::size_t input_w = kDefaultInputFrames;
  std::size_t input_c = 1;
  std::array<std::size_t, 3> conv_filters{kConv1Filters, kConv2Filters, kConv3Filters};
  std::size_t dense_units = 1;

  static NetworkShape of(const ModelWeights& w) {
    NetworkShape s;
    s.input_h = w.input_shape[0];
    s.input_w = w.input_shape[1];
    s.input_c = w.input_shape[2];
    s.conv_filters = {w.conv1_bias.element_count(), w.conv2_bias.element_count(), w.conv3_bias.element_count()};
    s.dense_units = w.dense_bias.element_count();
    return s;
  }
};

struct ComputeCounts {
  std::uint64_t macs = 0;
  std::uint64_t adds = 0;
};

/// Convolution MACs are out_h * out_w * out_c * (3 * 3 * in_c) on the
/// stride-2 valid-padding output grid; a layer whose input is smaller than
/// the kernel contributes nothing. Adds count bias additions plus two per
/// batch-norm channel (mean subtraction, shift).
inline ComputeCounts compute_counts(const NetworkShape& s) {
  ComputeCounts c;
  std::size_t h = s.input_h, w = s.input_w, ch = s.input_c;
  for (std::size_t filters : s.conv_filters) {
    const std::size_t oh = conv_output_extent(h), ow = conv_output_extent(w);
    c.macs += static_cast<std::uint64_t>(oh) * ow * filters * (kKernelSize * kKernelSize * ch);
    c.adds += static_cast<std::uint64_t>(oh) * ow * filters;
    h = oh;
    w = ow;
    ch = filters;
  }
  c.macs += static_cast<std::uint64_t>(ch) * s.dense_units;
  c.adds += s.dense_units + 2 * static_cast<std::uint64_t>(ch);
  return c;
}

/// Fills the model fields of `r`. Float memory is 4 bytes per parameter; int8
/// memory is the payload of the quantized model, i.e. one byte per kernel
/// weight plus the float biases, batch-norm parameters and scales.
inline BudgetReport model_budget(const ModelWeights& weights, BudgetReport r = {}) {
  weights.validate();
  r.param_count = weights.parameter_count();
  r.weights_memory_kb_float = static_cast<double>(r.param_count) * 4.0 / 1024.0;
  r.weights_memory_kb_int8 = static_cast<double>(quantize_model(weights).payload_bytes()) / 1024.0;
  const auto counts = compute_counts(NetworkShape::of(weights));
  r.mac_count = counts.macs;
  r.add_count = counts.adds;
  return r;
}

/// Decimal rendering without trailing zeros ("3.75", "50.11875", "200").
inline std::string trim_decimal(double v, int max_decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", max_decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s == "-0" ? "0" : s;
}

/// The ten frame-length/overlap rows of the sweep.
inline std::vector<MfccConfig> sweep_configs() {
  std::vector<MfccConfig> out;
  for (double frame : {5.0, 20.0, 35.0, 50.0, 70.0}) {
    for (double overlap : {0.0, 25.0}) out.push_back(MfccConfig::with_frame(frame, overlap));
  }
  return out;
}

inline const std::array<const char*, 7>& budget_columns() {
  static const std::array<const char*, 7> cols{
      "Frame length (ms)", "overlap(%)", "Hop length (ms)", "No.of frames", "Total MFCC coefficients",
      "Memory for MFCC (KB)", "Pre-processing Memory (KB)"};
  return cols;
}

inline std::array<std::string, 7> budget_row(const BudgetReport& r) {
  return {trim_decimal(r.frame_length_ms), trim_decimal(r.overlap_pct), trim_decimal(r.hop_ms),
          std::to_string(r.n_frames), std::to_string(r.total_mfcc_coefficients), trim_decimal(r.mfcc_memory_kb),
          trim_decimal(r.preprocessing_memory_kb)};
}

inline std::string format_budget_csv(const std::vector<BudgetReport>& rows) {
  std::string out;
  const auto& cols = budget_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += std::string(i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : rows) {
    const auto cells = budget_row(r);
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  }
  return out;
}

inline std::string format_budget_table(const std::vector<BudgetReport>& rows) {
  const auto& cols = budget_columns();
  std::array<std::size_t, 7> width{};
  for (std::size_t i = 0; i < cols.size(); ++i) width[i] = std::string(cols[i]).size();
  std::vector<std::array<std::string, 7>> cells;
  for (const auto& r : rows) {
    cells.push_back(budget_row(r));
    for (std::size_t i = 0; i < 7; ++i) width[i] = std::max(width[i], cells.back()[i].size());
  }
  auto line = [&](auto get) {
    std::string s;
    for (std::size_t i = 0; i < 7; ++i) {
      std::string cell = get(i);
      if (i) s += "  ";
      s += std::string(width[i] - cell.size(), ' ') + cell;
    }
    return s + '\n';
  };
  std::string out = line([&](std::size_t i) { return std::string(cols[i]); });
  for (const auto& row : cells) out += line([&](std::size_t i) { return row[i]; });
  return out;
}

/// Model accounting with the published estimates alongside the computed ones.
inline std::string format_model_budget(const BudgetReport& r) {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "parameters                 %zu\n"
                "weights float32 (KB)       %s\n"
                "weights int8 payload (KB)  %s\n"
                "weights int8 raw (KB)      %s\n"
                "MACs (computed)            %llu\n"
                "MACs (published)           %.0f\n"
                "additions (computed)       %llu\n"
                "additions (published)      %.0f\n",
                r.param_count, trim_decimal(r.weights_memory_kb_float, 4).c_str(),
                trim_decimal(r.weights_memory_kb_int8, 4).c_str(),
                trim_decimal(static_cast<double>(r.param_count) / 1024.0, 4).c_str(),
                static_cast<unsigned long long>(r.mac_count), kPublishedMacs,
                static_cast<unsigned long long>(r.add_count), kPublishedAdds);
  return buf;
}

}  // namespace coughdet
