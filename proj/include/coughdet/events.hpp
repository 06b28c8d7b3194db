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
 * Description: Turns per-segment verdicts plus onset peaks into timestamped
 * cough events, joining coughs that straddle a 1 s segment boundary.
 *
 * A positive segment k seeds an event from k + first_peak to
 * k + last_peak + tail_s (the whole segment when it has no peaks). The seed
 * joins the event left open by segment k-1 when its first peak lies within
 * merge_window_s of the boundary (a peakless segment counts as a peak at
 * the boundary) or when the two spans overlap.
 */

#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coughdet/audio.hpp"
#include "coughdet/error.hpp"
#include "coughdet/preprocess.hpp"

namespace coughdet {

struct SegmentVerdict {
  std::size_t segment_index = 0;
  double probability = 0.0;
  std::vector<OnsetPeak> onset_peaks;  // times relative to segment start
};

struct CoughEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  double confidence = 0.0;
  std::size_t merged_segment_count = 1;

  friend bool operator==(const CoughEvent&, const CoughEvent&) = default;
};

struct ConsolidationParams {
  double threshold = 0.5;
  double merge_window_s = 0.4;
  double tail_s = 0.45;
};

inline constexpr double kSegmentSeconds = static_cast<double>(kSegmentSamples) / kSampleRateHz;

/// Sequential fold over one stream's verdicts. Completed events are handed
/// back as soon as they can no longer grow, so memory stays bounded.
class EventConsolidator {
 public:
  explicit EventConsolidator(ConsolidationParams params = {}) : params_(params) {
    if (!(params_.tail_s > 0.0)) throw Error(ErrorKind::InvalidConfig, "tail_s must be > 0");
    if (!(params_.merge_window_s >= 0.0)) throw Error(ErrorKind::InvalidConfig, "merge_window_s must be >= 0");
  }

  std::optional<CoughEvent> push(const SegmentVerdict& v) {
    if (last_index_ && v.segment_index != *last_index_ + 1) {
      throw Error(ErrorKind::NonContiguousSegments, "segment " + std::to_string(v.segment_index) + " follows " +
                                                        std::to_string(*last_index_));
    }
    last_index_ = v.segment_index;
    if (v.probability < params_.threshold) return take_open();

    const double base = static_cast<double>(v.segment_index) * kSegmentSeconds;
    CoughEvent seed{base, base + kSegmentSeconds, v.probability, 1};
    double first_offset = 0.0;
    if (!v.onset_peaks.empty()) {
      first_offset = v.onset_peaks.front().time_s;
      seed.start_s = base + first_offset;
      seed.end_s = base + v.onset_peaks.back().time_s + params_.tail_s;
    }
    if (open_ && (first_offset <= params_.merge_window_s || seed.start_s <= open_->end_s)) {
      open_->end_s = std::max(open_->end_s, seed.end_s);
      open_->confidence = std::max(open_->confidence, seed.confidence);
      ++open_->merged_segment_count;
      return std::nullopt;
    }
    auto done = take_open();
    open_ = seed;
    return done;
  }

  std::optional<CoughEvent> finish() { return take_open(); }

 private:
  std::optional<CoughEvent> take_open() {
    auto e = open_;
    open_.reset();
    return e;
  }

  ConsolidationParams params_;
  std::optional<CoughEvent> open_;
  std::optional<std::size_t> last_index_;
};

inline std::vector<CoughEvent> consolidate(std::span<const SegmentVerdict> verdicts, double threshold = 0.5,
                                           double merge_window_s = 0.4, double tail_s = 0.45) {
  EventConsolidator c({threshold, merge_window_s, tail_s});
  std::vector<CoughEvent> events;
  for (const auto& v : verdicts) {
    if (auto e = c.push(v)) events.push_back(*e);
  }
  if (auto e = c.finish()) events.push_back(*e);
  return events;
}

}  // namespace coughdet
