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
// Per-round metrics log and the cross-method comparison report, with CSV and
// JSON emission. Doubles are written with full round-trip precision so
// re-reading a file reproduces the log exactly.

#ifndef ACESYNC_METRICS_HPP_
#define ACESYNC_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "acesync/errors.hpp"

namespace acesync {

struct MetricsRow {
  std::uint64_t round = 0;
  std::uint64_t epoch = 0;
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double mean_divergence = 0.0;
  double max_divergence = 0.0;
  std::uint64_t sync_interval = 1;
  double mean_compression_c = 0.0;
  double sim_time_s = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;

  std::uint64_t total_uplink_bytes() const;
  std::uint64_t total_downlink_bytes() const;
};

inline constexpr const char* kMetricsCsvHeader =
    "round,epoch,uplink_bytes,downlink_bytes,train_loss,val_accuracy,"
    "mean_divergence,max_divergence,sync_interval,mean_compression_c,sim_time_s";

struct ComparisonRow {
  std::string method;
  double mean_final_accuracy = 0.0;
  double mean_total_uplink_gb = 0.0;  // decimal GB (1e9 bytes)
  double mean_convergence_epoch = 0.0;
  double mean_final_loss = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

inline constexpr const char* kComparisonCsvHeader =
    "method,mean_final_accuracy,mean_total_uplink_gb,mean_convergence_epoch,"
    "mean_final_loss";

enum class OutputFormat { kCsv, kJson };

std::string to_csv(const MetricsLog& log);
std::string to_json(const MetricsLog& log);
std::string to_csv(const ComparisonReport& report);
std::string to_json(const ComparisonReport& report);

void emit(const MetricsLog& log, OutputFormat format, const std::string& path);
void emit(const ComparisonReport& report, OutputFormat format, const std::string& path);

MetricsLog load_metrics_csv(const std::string& path);

}  // namespace acesync

#endif  // ACESYNC_METRICS_HPP_
