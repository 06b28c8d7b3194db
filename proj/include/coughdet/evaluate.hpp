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

#include <atomic>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "coughdet/metrics.hpp"
#include "coughdet/pipeline.hpp"

namespace coughdet {

struct ManifestEntry {
  std::string path;
  bool cough = false;
};

inline bool parse_label(const std::string& raw, int line_no) {
  std::string s;
  for (char c : raw) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "cough" || s == "1" || s == "positive" || s == "true") return true;
  if (s == "unknown" || s == "not-cough" || s == "non-cough" || s == "0" || s == "negative" || s == "false") {
    return false;
  }
  throw Error(ErrorKind::InvalidConfig, "manifest line " + std::to_string(line_no) + ": unknown label '" + raw + "'");
}

/// CSV `path,label`, optional `path,label` header. Relative paths resolve
/// against `base_dir`.
inline std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {}) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "manifest line " + std::to_string(line_no) + ": expected path,label");
    }
    const std::string path = detail::trim(line.substr(0, comma));
    const std::string label = detail::trim(line.substr(comma + 1));
    if (out.empty() && path == "path" && label == "label") continue;
    std::filesystem::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    out.push_back({p.string(), parse_label(label, line_no)});
  }
  return out;
}

struct FileOutcome {
  std::string path;
  bool actual = false;
  bool predicted = false;  // at least one consolidated event
  std::size_t segments = 0;
  ConfusionCounts segment_counts;
};

/// Segment-level counts treat every 1 s segment of a file as carrying the
/// file's label. Event-level counts score a file positive when consolidation
/// produced at least one event.
struct EvaluationSummary {
  ConfusionCounts segment_level;
  ConfusionCounts event_level;
  std::vector<FileOutcome> files;
};

inline FileOutcome evaluate_file(const ManifestEntry& entry, const SegmentPipeline& pipeline) {
  const auto report = detect_file(entry.path, pipeline, /*keep_verdicts=*/true);
  FileOutcome f;
  f.path = entry.path;
  f.actual = entry.cough;
  f.predicted = !report.events.empty();
  f.segments = report.segment_count;
  for (const auto& v : report.verdicts) {
    f.segment_counts = accumulate(f.segment_counts, v.probability >= pipeline.config().decision_threshold, entry.cough);
  }
  return f;
}

/// Runs files on up to `jobs` threads; results keep manifest order, so the
/// summary does not depend on scheduling.
inline EvaluationSummary evaluate_manifest(const std::vector<ManifestEntry>& entries, const SegmentPipeline& pipeline,
                                           unsigned jobs = 1) {
  std::vector<FileOutcome> outcomes(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        outcomes[i] = evaluate_file(entries[i], pipeline);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(entries.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  EvaluationSummary s;
  for (auto& f : outcomes) {
    s.segment_level += f.segment_counts;
    s.event_level = accumulate(s.event_level, f.predicted, f.actual);
    s.files.push_back(std::move(f));
  }
  return s;
}

}  // namespace coughdet
