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

#include "acesync/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace acesync {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("failed writing: " + path);
}

json row_to_json(const MetricsRow& r) {
  return json{{"round", r.round},
              {"epoch", r.epoch},
              {"uplink_bytes", r.uplink_bytes},
              {"downlink_bytes", r.downlink_bytes},
              {"train_loss", r.train_loss},
              {"val_accuracy", r.val_accuracy},
              {"mean_divergence", r.mean_divergence},
              {"max_divergence", r.max_divergence},
              {"sync_interval", r.sync_interval},
              {"mean_compression_c", r.mean_compression_c},
              {"sim_time_s", r.sim_time_s}};
}

}  // namespace

std::uint64_t MetricsLog::total_uplink_bytes() const {
  std::uint64_t total = 0;
  for (const MetricsRow& r : rows) total += r.uplink_bytes;
  return total;
}

std::uint64_t MetricsLog::total_downlink_bytes() const {
  std::uint64_t total = 0;
  for (const MetricsRow& r : rows) total += r.downlink_bytes;
  return total;
}

std::string to_csv(const MetricsLog& log) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (const MetricsRow& r : log.rows) {
    out += std::to_string(r.round) + ',' + std::to_string(r.epoch) + ',' +
           std::to_string(r.uplink_bytes) + ',' + std::to_string(r.downlink_bytes) +
           ',' + fmt_double(r.train_loss) + ',' + fmt_double(r.val_accuracy) + ',' +
           fmt_double(r.mean_divergence) + ',' + fmt_double(r.max_divergence) + ',' +
           std::to_string(r.sync_interval) + ',' + fmt_double(r.mean_compression_c) +
           ',' + fmt_double(r.sim_time_s) + '\n';
  }
  return out;
}

std::string to_json(const MetricsLog& log) {
  json arr = json::array();
  for (const MetricsRow& r : log.rows) arr.push_back(row_to_json(r));
  return arr.dump(2);
}

std::string to_csv(const ComparisonReport& report) {
  std::string out = kComparisonCsvHeader;
  out += '\n';
  for (const ComparisonRow& r : report.rows) {
    out += r.method + ',' + fmt_double(r.mean_final_accuracy) + ',' +
           fmt_double(r.mean_total_uplink_gb) + ',' +
           fmt_double(r.mean_convergence_epoch) + ',' + fmt_double(r.mean_final_loss) +
           '\n';
  }
  return out;
}

std::string to_json(const ComparisonReport& report) {
  json arr = json::array();
  for (const ComparisonRow& r : report.rows) {
    arr.push_back(json{{"method", r.method},
                       {"mean_final_accuracy", r.mean_final_accuracy},
                       {"mean_total_uplink_gb", r.mean_total_uplink_gb},
                       {"mean_convergence_epoch", r.mean_convergence_epoch},
                       {"mean_final_loss", r.mean_final_loss}});
  }
  return arr.dump(2);
}

void emit(const MetricsLog& log, OutputFormat format, const std::string& path) {
  write_file(path, format == OutputFormat::kCsv ? to_csv(log) : to_json(log));
}

void emit(const ComparisonReport& report, OutputFormat format, const std::string& path) {
  write_file(path, format == OutputFormat::kCsv ? to_csv(report) : to_json(report));
}

MetricsLog load_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty metrics file");
  if (line != kMetricsCsvHeader) {
    throw ParseError(path + ":1: unexpected metrics header");
  }
  MetricsLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 11) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 11 fields");
    }
    try {
      MetricsRow r;
      r.round = std::stoull(fields[0]);
      r.epoch = std::stoull(fields[1]);
      r.uplink_bytes = std::stoull(fields[2]);
      r.downlink_bytes = std::stoull(fields[3]);
      r.train_loss = std::stod(fields[4]);
      r.val_accuracy = std::stod(fields[5]);
      r.mean_divergence = std::stod(fields[6]);
      r.max_divergence = std::stod(fields[7]);
      r.sync_interval = std::stoull(fields[8]);
      r.mean_compression_c = std::stod(fields[9]);
      r.sim_time_s = std::stod(fields[10]);
      log.rows.push_back(r);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  return log;
}

}  // namespace acesync
