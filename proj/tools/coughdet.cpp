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

// coughdet command-line tool: detect, featurize, evaluate, budget, quantize,
// init-weights.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "coughdet/coughdet.hpp"
#include "coughdet/report.hpp"

using namespace coughdet;

namespace {

constexpr int kExitEvents = 0;
constexpr int kExitNoEvents = 1;
constexpr int kExitError = 2;

struct ConfigOptions {
  std::string config_path;
  std::optional<std::string> weights;
  std::optional<double> threshold, frame_ms, overlap_pct, merge_window_s, tail_s;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config_path, "Pipeline configuration file (key = value)");
    app->add_option("-w,--weights", weights, "Weight file (CGHW)");
    app->add_option("--threshold", threshold, "Decision threshold");
    app->add_option("--frame-ms", frame_ms, "MFCC frame length in ms");
    app->add_option("--overlap", overlap_pct, "MFCC frame overlap in percent");
    app->add_option("--merge-window", merge_window_s, "Event merge window in seconds");
    app->add_option("--tail", tail_s, "Event tail in seconds");
    app->add_option("--set", overrides, "Override any config key: key=value");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config_path.empty()) {
      const auto bytes = read_file(config_path);
      try {
        c = parse_config(std::string(bytes.begin(), bytes.end()));
      } catch (const Error& e) {
        throw Error(e.kind(), config_path + ": " + e.detail());
      }
    }
    if (weights) c.weights_path = *weights;
    if (threshold) c.decision_threshold = *threshold;
    if (frame_ms) c.mfcc.frame_length_ms = *frame_ms;
    if (overlap_pct) c.mfcc.overlap_pct = *overlap_pct;
    if (merge_window_s) c.merge_window_s = *merge_window_s;
    if (tail_s) c.tail_s = *tail_s;
    for (const auto& kv : overrides) c = parse_config(kv, c);
    c.mfcc.validate();
    c.preprocess.validate();
    return c;
  }
};

SegmentPipeline make_pipeline(const PipelineConfig& config) {
  if (config.weights_path.empty()) throw Error(ErrorKind::InvalidConfig, "no weights file given (--weights)");
  return SegmentPipeline(config, load_weights_file(config.weights_path));
}

int run_detect(const ConfigOptions& opts, const std::string& input, bool dump, bool verdicts) {
  const PipelineConfig config = opts.resolve();
  if (dump) {
    std::cout << dump_config(config);
    return kExitEvents;
  }
  const SegmentPipeline pipeline = make_pipeline(config);
  DetectionReport report;
  if (input == "-") {
    std::ios::sync_with_stdio(false);
    report = detect_stream(std::cin, "<stdin>", pipeline, verdicts);
  } else {
    report = detect_file(input, pipeline, verdicts);
  }
  json out = to_json(report);
  if (verdicts) {
    json segs = json::array();
    for (const auto& v : report.verdicts) {
      json peaks = json::array();
      for (const auto& p : v.onset_peaks) peaks.push_back({{"time_s", p.time_s}, {"strength", p.strength}});
      segs.push_back({{"index", v.segment_index}, {"probability", v.probability}, {"onset_peaks", peaks}});
    }
    out["segments"] = segs;
  }
  std::cout << out.dump(2) << '\n';
  return report.events.empty() ? kExitNoEvents : kExitEvents;
}

int run_featurize(const ConfigOptions& opts, const std::string& input, const std::string& output,
                  const std::string& format, bool raw) {
  const PipelineConfig config = opts.resolve();
  const MfccExtractor extractor(config.mfcc);
  const BandPassFilter filter(config.preprocess);
  const AudioStream stream = parse_wav(read_file(input));
  std::vector<std::uint8_t> bytes;
  json rows = json::array();
  for (const auto& seg : segment(stream)) {
    const AudioSegment s = raw ? seg : band_pass(agc(seg, config.preprocess), filter);
    const MfccMatrix m = extractor.compute(s);
    if (format == "json") {
      rows.push_back(to_json(m, seg.index));
    } else {
      const auto block = encode_features(m, static_cast<std::uint32_t>(seg.index));
      bytes.insert(bytes.end(), block.begin(), block.end());
    }
  }
  if (format == "json") {
    const std::string text = rows.dump(2) + "\n";
    bytes.assign(text.begin(), text.end());
  }
  if (output.empty() || output == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    write_file(output, bytes);
  }
  return kExitEvents;
}

int run_evaluate(const ConfigOptions& opts, const std::string& manifest_path, unsigned jobs) {
  const PipelineConfig config = opts.resolve();
  const SegmentPipeline pipeline = make_pipeline(config);
  const auto bytes = read_file(manifest_path);
  std::vector<ManifestEntry> entries;
  try {
    entries = parse_manifest(std::string(bytes.begin(), bytes.end()),
                             std::filesystem::path(manifest_path).parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), manifest_path + ": " + e.detail());
  }
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const EvaluationSummary summary = evaluate_manifest(entries, pipeline, jobs);
  std::cout << to_json(summary, config_fingerprint(config)).dump(2) << '\n';
  std::cerr << format_eval_table(metrics(summary.segment_level), "segment level")
            << format_eval_table(metrics(summary.event_level), "file level");
  return kExitEvents;
}

int run_budget(bool all, const std::vector<double>& frames, double overlap, bool csv, double scratch_kb,
               const std::string& weights_path) {
  std::vector<BudgetReport> rows;
  if (all || frames.empty()) {
    for (const auto& c : sweep_configs()) rows.push_back(mfcc_budget(c, scratch_kb));
  }
  for (double f : frames) {
    const auto c = MfccConfig::with_frame(f, overlap);
    c.validate();
    rows.push_back(mfcc_budget(c, scratch_kb));
  }
  std::cout << (csv ? format_budget_csv(rows) : format_budget_table(rows));
  if (!weights_path.empty()) {
    std::cout << '\n' << format_model_budget(model_budget(load_weights_file(weights_path)));
  }
  return kExitEvents;
}

int run_quantize(const std::string& in, const std::string& out) {
  const ModelWeights q = quantize_model(load_weights_file(in));
  write_file(out, save_weights(q));
  std::cerr << in << " -> " << out << ": " << q.payload_bytes() << " payload bytes\n";
  return kExitEvents;
}

int run_init_weights(const std::string& out, std::uint64_t seed, std::uint32_t frames, double dense_bias) {
  write_file(out, save_weights(init_weights(seed, frames, static_cast<float>(dense_bias))));
  return kExitEvents;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming cough detection"};
  app.require_subcommand(1);

  ConfigOptions cfg;

  auto* detect = app.add_subcommand("detect", "Detect cough events in a WAV file (\"-\" reads stdin)");
  std::string detect_input = "-";
  bool dump_config_flag = false, verdicts = false;
  detect->add_option("input", detect_input, "WAV path or -");
  detect->add_flag("--dump-config", dump_config_flag, "Print the resolved configuration and exit");
  detect->add_flag("--segments", verdicts, "Include per-segment verdicts in the report");
  cfg.add_to(detect);

  auto* featurize = app.add_subcommand("featurize", "Write MFCC matrices for each 1 s segment");
  std::string feat_input, feat_output, feat_format = "bin";
  bool feat_raw = false;
  featurize->add_option("input", feat_input, "WAV path")->required();
  featurize->add_option("-o,--output", feat_output, "Output path (default stdout)");
  featurize->add_option("--format", feat_format, "bin or json")->check(CLI::IsMember({"bin", "json"}));
  featurize->add_flag("--raw", feat_raw, "Skip AGC and band-pass");
  cfg.add_to(featurize);

  auto* evaluate = app.add_subcommand("evaluate", "Score a labeled manifest (CSV: path,label)");
  std::string manifest;
  unsigned jobs = 1;
  evaluate->add_option("manifest", manifest, "Manifest CSV")->required();
  evaluate->add_option("-j,--jobs", jobs, "Worker threads across files (0 = all cores)");
  cfg.add_to(evaluate);

  auto* budget = app.add_subcommand("budget", "Memory and compute budget table");
  bool budget_all = false, budget_csv = false;
  std::vector<double> budget_frames;
  double budget_overlap = 25.0, scratch_kb = kDefaultScratchKb;
  std::string budget_weights;
  budget->add_flag("--all", budget_all, "Print the ten standard rows");
  budget->add_option("--frame", budget_frames, "Extra row(s) for a frame length in ms");
  budget->add_option("--overlap", budget_overlap, "Overlap percent for --frame rows");
  budget->add_flag("--csv", budget_csv, "CSV instead of an aligned table");
  budget->add_option("--scratch-kb", scratch_kb, "Pre-processing scratch memory in KB");
  budget->add_option("--weights", budget_weights, "Also report model size and operation counts");

  auto* quantize = app.add_subcommand("quantize", "Convert a float weight file to int8");
  std::string q_in, q_out;
  quantize->add_option("input", q_in, "Float CGHW file")->required();
  quantize->add_option("output", q_out, "Output CGHW file")->required();

  auto* init = app.add_subcommand("init-weights", "Write seeded random weights for the default network");
  std::string init_out;
  std::uint64_t seed = 1;
  std::uint32_t init_frames = kDefaultInputFrames;
  double dense_bias = 0.0;
  init->add_option("output", init_out, "Output CGHW file")->required();
  init->add_option("--seed", seed, "RNG seed");
  init->add_option("--frames", init_frames, "Input frame count");
  init->add_option("--dense-bias", dense_bias, "Dense layer bias");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*detect) return run_detect(cfg, detect_input, dump_config_flag, verdicts);
    if (*featurize) return run_featurize(cfg, feat_input, feat_output, feat_format, feat_raw);
    if (*evaluate) return run_evaluate(cfg, manifest, jobs);
    if (*budget) return run_budget(budget_all, budget_frames, budget_overlap, budget_csv, scratch_kb, budget_weights);
    if (*quantize) return run_quantize(q_in, q_out);
    if (*init) return run_init_weights(init_out, seed, init_frames, dense_bias);
  } catch (const Error& e) {
    std::cerr << "coughdet: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "coughdet: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
