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
// Experiment orchestration: the adaptive sync protocol round loop, the three
// baselines (fullsync, topk, fedavg_periodic), convergence metrics, and the
// cross-method comparison driver. Runs are single-threaded and deterministic
// per (config, seed).

#ifndef ACESYNC_RUNNER_HPP_
#define ACESYNC_RUNNER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "acesync/config.hpp"
#include "acesync/metrics.hpp"
#include "acesync/tensor.hpp"

namespace acesync {

// Per-device transmission audit, fired once per device per round for the
// adaptive method; used by tests to check residual bookkeeping.
struct RoundAudit {
  std::uint64_t round = 0;
  int device = 0;
  const std::vector<double>& gradient;         // raw local gradient sum
  const std::vector<double>& corrected;        // after error feedback
  const std::vector<double>& sent;             // dense dequantized transmission
  const std::vector<double>& residual_before;
  const std::vector<double>& residual_after;
};

using AuditHook = std::function<void(const RoundAudit&)>;

struct RunOutput {
  MetricsLog log;
  ModelParams final_model;
  // Aggregated global update per round for gradient-transmitting methods;
  // empty vectors for fedavg_periodic rounds.
  std::vector<std::vector<double>> round_updates;
  std::uint64_t uplink_bytes = 0;    // netsim counter totals
  std::uint64_t downlink_bytes = 0;
  double tau = 0.0;                  // divergence threshold in effect at the end
};

RunOutput run_method(const ExperimentConfig& config, const AuditHook& audit = {});

// Thin wrappers enforcing the method family.
MetricsLog run_experiment(const ExperimentConfig& config);  // adaptive method
MetricsLog run_baseline(const ExperimentConfig& config);    // one of the baselines

// First epoch whose validation accuracy is within 1% of final_accuracy
// (val_accuracy(e) >= 0.99 * final_accuracy), using the last round of each
// epoch. Throws ConfigError on an empty log.
std::uint64_t convergence_epoch(const MetricsLog& log, double final_accuracy);
std::uint64_t convergence_epoch(const MetricsLog& log);  // final = last epoch

// Runs every (method, seed) cell off the shared base config and averages the
// per-seed results into one comparison row per method.
ComparisonReport compare(const ExperimentConfig& base,
                         const std::vector<Method>& methods,
                         const std::vector<std::uint64_t>& seeds);

}  // namespace acesync

#endif  // ACESYNC_RUNNER_HPP_
