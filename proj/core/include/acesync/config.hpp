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
// Experiment configuration: defaults for the desk-scale workload, JSON
// loading with unknown-key rejection, and range validation.

#ifndef ACESYNC_CONFIG_HPP_
#define ACESYNC_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "acesync/compression.hpp"
#include "acesync/netsim.hpp"
#include "acesync/tensor.hpp"

namespace acesync {

enum class Method { kAceSync, kFullSync, kTopK, kFedAvgPeriodic };

Method method_from_string(const std::string& name);
std::string method_name(Method method);

struct DataConfig {
  DataSpec spec;                // samples/features/classes/class_sep/noise_sigma
  double val_fraction = 0.2;    // held-out tail of the dataset
};

struct DeviceConfig {
  std::size_t count = 8;
  double compute_time_lo_s = 0.001;
  double compute_time_hi_s = 0.004;
  double reliability_lo = 0.8;
  double reliability_hi = 1.0;
  TraceSpec trace;
  std::string trace_file;  // non-empty: load instead of generating
};

struct TrainingConfig {
  std::size_t rounds = 40;
  std::size_t local_batches_per_round = 1;
  std::size_t batch_size = 125;
  double lr = 0.05;
  std::string optimizer = "sgd";  // "sgd" | "adamw" (global step only)
  double weight_decay = 0.0;      // adamw only
};

struct PolicyConfig {
  double p = 0.25;                 // top-p full-precision fraction of blocks
  double alpha = 0.7;              // temporal/structural fusion
  double w1 = 4.0;
  double w2 = 1.0;
  double rho = 0.9;                // EMA decay for gradient stats
  std::size_t window = 16;         // stats window T
  double beta = 0.005;             // compression schedule sensitivity
  double c_min = 0.05;
  double c_max = 0.9;
  int b_min = 2;
  int b_max = 16;
  double gamma = 0.9;              // error-feedback momentum; 0 disables
  double lambda = 0.0;             // cached-reconstruction decay; 0 disables
  std::string tau_mode = "auto";   // "auto" | "fixed"
  double tau = 0.5;                // used when tau_mode == "fixed"
  int interval_min = 1;
  int interval_max = 8;
  int initial_interval = 4;
  std::size_t block_size = 64;
  std::size_t clusters = 2;
  double budget_window_s = 0.005;  // round transmit window for byte budgets
  std::string weight_mode = "size_reliability";  // | "size_only"
};

struct BaselineConfig {
  double topk_fraction = 0.1;
  std::size_t fedavg_period = 5;
};

struct ExperimentConfig {
  Method method = Method::kAceSync;
  std::vector<std::size_t> arch{20, 64, 5};
  DataConfig data;
  DeviceConfig devices;
  TrainingConfig training;
  PolicyConfig policy;
  BaselineConfig baseline;
  std::uint64_t seed = 1;

  CompressionSchedule schedule() const;
  // Throws ConfigError on any out-of-range field.
  void validate() const;
};

// Strict JSON loading: unknown keys anywhere are a ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace acesync

#endif  // ACESYNC_CONFIG_HPP_
