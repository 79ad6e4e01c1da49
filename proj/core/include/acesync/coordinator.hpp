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
// Cloud-side aggregation: device weighting, cached reconstruction of
// untransmitted blocks, weighted update aggregation, divergence-driven sync
// interval control, device clustering, and global model broadcast.

#ifndef ACESYNC_COORDINATOR_HPP_
#define ACESYNC_COORDINATOR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "acesync/compression.hpp"
#include "acesync/netsim.hpp"
#include "acesync/tensor.hpp"

namespace acesync {

struct DeviceWeight {
  std::vector<double> omega;  // sums to 1
};

enum class WeightMode { kSizeTimesReliability, kSizeOnly };

// omega_k proportional to dataset_size * reliability (or dataset_size alone).
DeviceWeight device_weights(std::span<const DeviceProfile> profiles,
                            WeightMode mode = WeightMode::kSizeTimesReliability);

// Last dequantized gradient per (device, block), for reconstructing blocks a
// device did not transmit. lambda scales the cached value on reuse; lambda = 0
// fills missing blocks with zeros.
class GradientCache {
 public:
  GradientCache(std::size_t devices, std::size_t blocks, double lambda);

  double lambda() const { return lambda_; }
  const std::vector<double>* lookup(int device, int block) const;
  std::uint64_t round_received(int device, int block) const;
  void store(int device, int block, std::vector<double> values, std::uint64_t round);

 private:
  struct Entry {
    std::vector<double> values;
    std::uint64_t round = 0;
    bool valid = false;
  };
  double lambda_;
  std::size_t blocks_;
  std::vector<Entry> cells_;  // devices x blocks
};

// One received block: either full-precision values or a quantized payload.
struct TransmittedBlock {
  int block_id = 0;
  bool full_precision = true;
  std::vector<double> values;  // full-precision payload
  QuantizedBlock quantized;    // used when !full_precision
};

// Dequantizes received blocks in place, fills missing blocks from the cache
// (scaled by lambda), and refreshes the cache with what arrived.
std::vector<double> reconstruct_update(std::span<const TransmittedBlock> received,
                                       GradientCache& cache, const BlockIndex& index,
                                       int device, std::uint64_t round);

// G = sum_k omega_k * update_k, accumulated in ascending device order.
GradientVector aggregate(std::span<const GradientVector> updates,
                         const DeviceWeight& weights);

// Euclidean distance between a device model and the global model.
double compute_divergence(const ModelParams& device_model,
                          const ModelParams& global_model);

struct DivergenceReport {
  std::vector<double> divergence;  // per device
  double tau = 0.5;
  int sync_interval = 4;
  int interval_min = 1;
  int interval_max = 8;
};

// Multiplicative decrease on threshold violation, additive increase otherwise.
DivergenceReport adjust_sync_interval(DivergenceReport report);

struct ClusterAssignment {
  std::vector<int> cluster_of;  // device index -> cluster id in [0, clusters)
  int clusters = 1;
  // Cluster members share these compression-schedule parameters.
  std::vector<CompressionSchedule> schedules;

  const CompressionSchedule& schedule_of(int device) const {
    return schedules[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(device)])];
  }
};

// k-means over min-max-normalized (mean trace bandwidth, compute time,
// dataset size) with seeded farthest-point init; deterministic per seed.
// Every cluster starts from base_schedule; callers may override per cluster.
ClusterAssignment cluster_devices(std::span<const DeviceProfile> profiles,
                                  std::span<const BandwidthTrace> traces, int k,
                                  std::uint64_t seed,
                                  const CompressionSchedule& base_schedule = {});

struct DeliveryRequest {
  int device_id = 0;
  std::uint64_t bytes = 0;
};

// One full-precision model payload per target, framed like an uplink message.
std::vector<DeliveryRequest> broadcast_global(const ModelParams& model,
                                              std::span<const int> targets,
                                              const BlockIndex& index);

}  // namespace acesync

#endif  // ACESYNC_COORDINATOR_HPP_
