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
 * Description: JSON renderings of detection, evaluation and feature outputs.
 * Requires nlohmann/json ("json.hpp") on the include path.
 */

#pragma once

#include <optional>
#include <string>

#include "coughdet/budget.hpp"
#include "coughdet/evaluate.hpp"
#include "coughdet/metrics.hpp"
#include "coughdet/mfcc.hpp"
#include "coughdet/pipeline.hpp"
#include "json.hpp"

namespace coughdet {

using nlohmann::json;

inline json to_json(const CoughEvent& e) {
  return {{"start_s", e.start_s},
          {"end_s", e.end_s},
          {"confidence", e.confidence},
          {"merged_segment_count", e.merged_segment_count}};
}

inline json to_json(const DetectionReport& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  return {{"source", r.source},
          {"config_fingerprint", r.config_fingerprint},
          {"segment_count", r.segment_count},
          {"events", events}};
}

inline json rate_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const EvalReport& r) {
  return {{"counts", {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
          {"sensitivity", rate_json(r.sensitivity)},
          {"specificity", rate_json(r.specificity)},
          {"ppv", rate_json(r.ppv)},
          {"npv", rate_json(r.npv)},
          {"f1", rate_json(r.f1)}};
}

inline json to_json(const EvaluationSummary& s, const std::string& fingerprint) {
  json files = json::array();
  for (const auto& f : s.files) {
    files.push_back({{"path", f.path}, {"label", f.actual ? "cough" : "unknown"},
                     {"predicted", f.predicted ? "cough" : "unknown"}, {"segments", f.segments}});
  }
  return {{"config_fingerprint", fingerprint},
          {"segment_level", to_json(metrics(s.segment_level))},
          {"event_level", to_json(metrics(s.event_level))},
          {"files", files}};
}

inline json to_json(const MfccMatrix& m, std::size_t segment_index) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.n_mfcc; ++i) {
    json row = json::array();
    for (std::size_t t = 0; t < m.n_frames; ++t) row.push_back(m.at(i, t));
    rows.push_back(std::move(row));
  }
  return {{"segment_index", segment_index}, {"n_mfcc", m.n_mfcc}, {"n_frames", m.n_frames}, {"coefficients", rows}};
}

}  // namespace coughdet
