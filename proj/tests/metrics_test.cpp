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

#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "acesync/rng.hpp"

using namespace acesync;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

MetricsLog random_log(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  MetricsLog log;
  for (std::size_t i = 0; i < rows; ++i) {
    MetricsRow r;
    r.round = i + 1;
    r.epoch = i / 4 + 1;
    r.uplink_bytes = rng.index(1 << 20);
    r.downlink_bytes = rng.index(1 << 20);
    r.train_loss = rng.uniform01() * 3.0;
    r.val_accuracy = rng.uniform01();
    r.mean_divergence = rng.uniform01() * 0.1;
    r.max_divergence = r.mean_divergence * 1.5;
    r.sync_interval = 1 + rng.index(8);
    r.mean_compression_c = rng.uniform01();
    r.sim_time_s = static_cast<double>(i) * 0.37 + rng.uniform01();
    log.rows.push_back(r);
  }
  return log;
}

bool rows_equal(const MetricsRow& a, const MetricsRow& b) {
  return a.round == b.round && a.epoch == b.epoch && a.uplink_bytes == b.uplink_bytes &&
         a.downlink_bytes == b.downlink_bytes && a.train_loss == b.train_loss &&
         a.val_accuracy == b.val_accuracy && a.mean_divergence == b.mean_divergence &&
         a.max_divergence == b.max_divergence && a.sync_interval == b.sync_interval &&
         a.mean_compression_c == b.mean_compression_c && a.sim_time_s == b.sim_time_s;
}

}  // namespace

TEST_CASE("metrics CSV header matches the documented schema") {
  MetricsLog empty;
  const std::string csv = to_csv(empty);
  CHECK(csv == std::string(kMetricsCsvHeader) + "\n");
}

TEST_CASE("metrics CSV round trip is exact") {
  MetricsLog log = random_log(25, 7);
  const std::string path = temp_path("acesync_metrics_roundtrip.csv");
  emit(log, OutputFormat::kCsv, path);
  MetricsLog back = load_metrics_csv(path);
  REQUIRE(back.rows.size() == log.rows.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    CHECK(rows_equal(log.rows[i], back.rows[i]));
  }
  std::filesystem::remove(path);
}

TEST_CASE("metrics JSON keys match the CSV schema") {
  MetricsLog log = random_log(3, 9);
  const std::string json_text = to_json(log);
  for (const char* key :
       {"round", "epoch", "uplink_bytes", "downlink_bytes", "train_loss",
        "val_accuracy", "mean_divergence", "max_divergence", "sync_interval",
        "mean_compression_c", "sim_time_s"}) {
    CHECK(json_text.find(key) != std::string::npos);
  }
}

TEST_CASE("metrics loader rejects malformed files") {
  const std::string path = temp_path("acesync_metrics_bad.csv");
  {
    std::ofstream out(path);
    out << "round,epoch\n";
  }
  CHECK_THROWS_AS(load_metrics_csv(path), ParseError);
  {
    std::ofstream out(path);
    out << kMetricsCsvHeader << "\n";
    out << "1,1,nope\n";
  }
  CHECK_THROWS_AS(load_metrics_csv(path), ParseError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_metrics_csv(path), IoError);
}

TEST_CASE("comparison report emission") {
  ComparisonReport report;
  report.rows.push_back({"fullsync", 0.915, 0.00221, 5.0, 0.58});
  report.rows.push_back({"acesync", 0.913, 0.00106, 5.0, 0.58});
  const std::string csv = to_csv(report);
  CHECK(csv.find(kComparisonCsvHeader) == 0);
  CHECK(csv.find("fullsync") != std::string::npos);
  CHECK(csv.find("acesync") != std::string::npos);

  const std::string path = temp_path("acesync_comparison.json");
  emit(report, OutputFormat::kJson, path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("mean_total_uplink_gb") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("total byte helpers") {
  MetricsLog log = random_log(10, 3);
  std::uint64_t up = 0;
  std::uint64_t down = 0;
  for (const MetricsRow& r : log.rows) {
    up += r.uplink_bytes;
    down += r.downlink_bytes;
  }
  CHECK(log.total_uplink_bytes() == up);
  CHECK(log.total_downlink_bytes() == down);
}
