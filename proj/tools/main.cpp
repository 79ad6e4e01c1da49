// Copyright 2026 the acesync authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
//
// acesync CLI: run experiments, compare methods, generate traces, and print
// Table-style summaries from metrics files.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O or parse error,
// 4 internal invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acesync/config.hpp"
#include "acesync/metrics.hpp"
#include "acesync/netsim.hpp"
#include "acesync/rng.hpp"
#include "acesync/runner.hpp"

namespace {

using namespace acesync;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string metrics_filename(const std::string& dir, Method method, std::uint64_t seed) {
  return (std::filesystem::path(dir) /
          ("metrics_" + method_name(method) + "_" + std::to_string(seed) + ".csv"))
      .string();
}

void print_summary(const std::string& method, const MetricsLog& log) {
  if (log.rows.empty()) {
    std::printf("%-16s (empty log)\n", method.c_str());
    return;
  }
  const MetricsRow& last = log.rows.back();
  std::printf("%-16s acc=%.4f loss=%.4f uplink=%.6f GB conv_epoch=%llu rounds=%zu\n",
              method.c_str(), last.val_accuracy, last.train_loss,
              static_cast<double>(log.total_uplink_bytes()) / 1e9,
              static_cast<unsigned long long>(convergence_epoch(log)), log.rows.size());
}

void print_report(const ComparisonReport& report) {
  std::printf("%-18s %12s %14s %18s %12s\n", "method", "accuracy", "uplink_gb",
              "convergence_epoch", "final_loss");
  for (const ComparisonRow& r : report.rows) {
    std::printf("%-18s %12.4f %14.6f %18.2f %12.4f\n", r.method.c_str(),
                r.mean_final_accuracy, r.mean_total_uplink_gb,
                r.mean_convergence_epoch, r.mean_final_loss);
  }
}

int run_command(const std::string& config_path, std::int64_t seed_override,
                const std::string& out_dir) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  std::filesystem::create_directories(out_dir);
  const RunOutput out = run_method(cfg);
  const std::string path = metrics_filename(out_dir, cfg.method, cfg.seed);
  emit(out.log, OutputFormat::kCsv, path);
  print_summary(method_name(cfg.method), out.log);
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int compare_command(const std::string& config_path, const std::string& methods_csv,
                    const std::string& seeds_csv, const std::string& out_dir) {
  ExperimentConfig base = load_config(config_path);
  std::vector<Method> methods;
  for (const std::string& m : split_list(methods_csv)) {
    methods.push_back(method_from_string(m));
  }
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_list(seeds_csv)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("bad seed value '" + s + "'");
    }
  }
  std::filesystem::create_directories(out_dir);

  // Per-cell metrics files alongside the summary report.
  for (Method m : methods) {
    for (std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.method = m;
      cfg.seed = seed;
      const RunOutput out = run_method(cfg);
      emit(out.log, OutputFormat::kCsv, metrics_filename(out_dir, m, seed));
    }
  }
  const ComparisonReport report = compare(base, methods, seeds);
  const std::string csv_path = (std::filesystem::path(out_dir) / "comparison.csv").string();
  const std::string json_path = (std::filesystem::path(out_dir) / "comparison.json").string();
  emit(report, OutputFormat::kCsv, csv_path);
  emit(report, OutputFormat::kJson, json_path);
  print_report(report);
  std::printf("wrote %s and %s\n", csv_path.c_str(), json_path.c_str());
  return kExitOk;
}

int trace_gen_command(std::size_t devices, double duration, std::uint64_t seed,
                      const std::string& out_file, double step,
                      double jitter_sigma) {
  if (devices == 0) throw ConfigError("--devices must be >= 1");
  TraceSpec spec;
  spec.duration_s = duration;
  spec.step_s = step;
  spec.jitter_sigma = jitter_sigma;
  std::vector<BandwidthTrace> traces;
  for (std::size_t k = 0; k < devices; ++k) {
    traces.push_back(gen_trace(spec, derive_seed(seed, 3, k), static_cast<int>(k)));
  }
  save_traces(traces, out_file);
  std::printf("wrote %zu device trace(s) to %s\n", devices, out_file.c_str());
  return kExitOk;
}

int report_command(const std::string& in_file) {
  const MetricsLog log = load_metrics_csv(in_file);
  if (log.rows.empty()) throw ConfigError("metrics file has no rows");
  const MetricsRow& last = log.rows.back();
  std::printf("%-24s %s\n", "metric", "value");
  std::printf("%-24s %.4f\n", "final_accuracy", last.val_accuracy);
  std::printf("%-24s %.4f\n", "final_loss", last.train_loss);
  std::printf("%-24s %.6f\n", "total_uplink_gb",
              static_cast<double>(log.total_uplink_bytes()) / 1e9);
  std::printf("%-24s %.6f\n", "total_downlink_gb",
              static_cast<double>(log.total_downlink_bytes()) / 1e9);
  std::printf("%-24s %llu\n", "convergence_epoch",
              static_cast<unsigned long long>(convergence_epoch(log)));
  std::printf("%-24s %llu\n", "epochs",
              static_cast<unsigned long long>(last.epoch));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acesync: adaptive cloud-edge synchronization simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--seed", seed_override, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory");

  std::string methods_csv;
  std::string seeds_csv;
  CLI::App* cmp = app.add_subcommand("compare", "Run a method x seed grid");
  cmp->add_option("--config", config_path, "JSON config path")->required();
  cmp->add_option("--methods", methods_csv, "Comma-separated methods")->required();
  cmp->add_option("--seeds", seeds_csv, "Comma-separated seeds")->required();
  cmp->add_option("--out", out_dir, "Output directory");

  CLI::App* trace = app.add_subcommand("trace", "Bandwidth trace utilities");
  trace->require_subcommand(1);
  std::size_t devices = 8;
  double duration = 600.0;
  double step = 1.0;
  double jitter = 0.05;
  std::uint64_t trace_seed = 1;
  std::string trace_out = "traces.csv";
  CLI::App* gen = trace->add_subcommand("gen", "Generate per-device traces");
  gen->add_option("--devices", devices, "Device count")->required();
  gen->add_option("--duration", duration, "Trace duration in seconds")->required();
  gen->add_option("--seed", trace_seed, "Trace seed");
  gen->add_option("--out", trace_out, "Output CSV file")->required();
  gen->add_option("--step", step, "Sample step in seconds");
  gen->add_option("--jitter", jitter, "Relative jitter sigma");

  std::string report_in;
  CLI::App* rep = app.add_subcommand("report", "Summarize a metrics CSV");
  rep->add_option("--in", report_in, "Metrics CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, seed_override, out_dir);
    if (cmp->parsed()) {
      return compare_command(config_path, methods_csv, seeds_csv, out_dir);
    }
    if (trace->parsed() && gen->parsed()) {
      return trace_gen_command(devices, duration, trace_seed, trace_out, step, jitter);
    }
    if (rep->parsed()) return report_command(report_in);
    std::fprintf(stderr, "no subcommand selected\n");
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitIo;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
