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

#include "acesync/coordinator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "acesync/rng.hpp"

namespace acesync {

DeviceWeight device_weights(std::span<const DeviceProfile> profiles, WeightMode mode) {
  if (profiles.empty()) throw ConfigError("device_weights needs at least one device");
  DeviceWeight w;
  w.omega.resize(profiles.size());
  double total = 0.0;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    if (profiles[k].dataset_size == 0) {
      throw ConfigError("device dataset sizes must be > 0");
    }
    const double n = static_cast<double>(profiles[k].dataset_size);
    w.omega[k] = mode == WeightMode::kSizeOnly ? n : n * profiles[k].reliability;
    total += w.omega[k];
  }
  if (total <= 0.0) throw ConfigError("all device weight products are zero");
  for (double& x : w.omega) x /= total;
  return w;
}

GradientCache::GradientCache(std::size_t devices, std::size_t blocks, double lambda)
    : lambda_(lambda), blocks_(blocks), cells_(devices * blocks) {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("cache lambda must be in [0, 1]");
}

const std::vector<double>* GradientCache::lookup(int device, int block) const {
  const Entry& e =
      cells_[static_cast<std::size_t>(device) * blocks_ + static_cast<std::size_t>(block)];
  return e.valid ? &e.values : nullptr;
}

std::uint64_t GradientCache::round_received(int device, int block) const {
  const Entry& e =
      cells_[static_cast<std::size_t>(device) * blocks_ + static_cast<std::size_t>(block)];
  return e.valid ? e.round : 0;
}

void GradientCache::store(int device, int block, std::vector<double> values,
                          std::uint64_t round) {
  Entry& e =
      cells_[static_cast<std::size_t>(device) * blocks_ + static_cast<std::size_t>(block)];
  e.values = std::move(values);
  e.round = round;
  e.valid = true;
}

std::vector<double> reconstruct_update(std::span<const TransmittedBlock> received,
                                       GradientCache& cache, const BlockIndex& index,
                                       int device, std::uint64_t round) {
  std::vector<double> out(index.total_len, 0.0);
  std::vector<bool> got(index.count(), false);
  for (const TransmittedBlock& tb : received) {
    if (tb.block_id < 0 || static_cast<std::size_t>(tb.block_id) >= index.count()) {
      throw ProtocolError("payload references an unknown block id");
    }
    const Block& b = index.blocks[static_cast<std::size_t>(tb.block_id)];
    std::vector<double> values =
        tb.full_precision ? tb.values : dequantize_block(tb.quantized);
    if (values.size() != b.len) {
      throw ProtocolError("payload length does not match block length");
    }
    std::copy(values.begin(), values.end(), out.begin() + static_cast<long>(b.offset));
    got[static_cast<std::size_t>(tb.block_id)] = true;
    cache.store(device, tb.block_id, std::move(values), round);
  }
  if (cache.lambda() > 0.0) {
    for (const Block& b : index.blocks) {
      if (got[static_cast<std::size_t>(b.block_id)]) continue;
      const std::vector<double>* cached = cache.lookup(device, b.block_id);
      if (cached == nullptr) continue;
      for (std::size_t i = 0; i < b.len; ++i) {
        out[b.offset + i] = cache.lambda() * (*cached)[i];
      }
    }
  }
  return out;
}

GradientVector aggregate(std::span<const GradientVector> updates,
                         const DeviceWeight& weights) {
  if (updates.empty() || updates.size() != weights.omega.size()) {
    throw ShapeError("updates/weights count mismatch");
  }
  const std::size_t n = updates.front().size();
  GradientVector g;
  g.values.assign(n, 0.0);
  for (std::size_t k = 0; k < updates.size(); ++k) {
    if (updates[k].size() != n) throw ShapeError("update length mismatch");
    const double w = weights.omega[k];
    for (std::size_t i = 0; i < n; ++i) g.values[i] += w * updates[k].values[i];
  }
  return g;
}

double compute_divergence(const ModelParams& device_model,
                          const ModelParams& global_model) {
  if (device_model.size() != global_model.size()) {
    throw ShapeError("model length mismatch in divergence");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < device_model.size(); ++i) {
    const double d = device_model.values[i] - global_model.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

DivergenceReport adjust_sync_interval(DivergenceReport report) {
  if (report.interval_min < 1 || report.interval_min > report.interval_max) {
    throw ConfigError("interval bounds require 1 <= I_min <= I_max");
  }
  double peak = 0.0;
  for (double d : report.divergence) peak = std::max(peak, d);
  if (peak > report.tau) {
    report.sync_interval = std::max(report.interval_min, report.sync_interval / 2);
  } else {
    report.sync_interval = std::min(report.interval_max, report.sync_interval + 1);
  }
  return report;
}

ClusterAssignment cluster_devices(std::span<const DeviceProfile> profiles,
                                  std::span<const BandwidthTrace> traces, int k,
                                  std::uint64_t seed,
                                  const CompressionSchedule& base_schedule) {
  const std::size_t n = profiles.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("cluster count must be in [1, device count]");
  }

  // Feature rows: mean trace bandwidth, compute time, dataset size, each
  // min-max normalized across devices.
  std::vector<std::array<double, 3>> feat(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_bw = 0.0;
    const BandwidthTrace* trace = nullptr;
    for (const BandwidthTrace& t : traces) {
      if (t.device_id == profiles[i].trace_id) {
        trace = &t;
        break;
      }
    }
    if (trace == nullptr) throw ConfigError("device references a missing trace");
    for (const TraceSample& s : trace->samples) mean_bw += s.bandwidth_mbps;
    mean_bw /= static_cast<double>(trace->samples.size());
    feat[i] = {mean_bw, profiles[i].compute_time_per_batch_s,
               static_cast<double>(profiles[i].dataset_size)};
  }
  for (std::size_t d = 0; d < 3; ++d) {
    double lo = feat[0][d];
    double hi = feat[0][d];
    for (const auto& f : feat) {
      lo = std::min(lo, f[d]);
      hi = std::max(hi, f[d]);
    }
    const double span = hi - lo;
    for (auto& f : feat) f[d] = span > 0.0 ? (f[d] - lo) / span : 0.0;
  }

  auto dist2 = [&](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const double x = a[d] - b[d];
      s += x * x;
    }
    return s;
  };

  // Farthest-point init from a seeded start.
  Rng rng(seed);
  std::vector<std::array<double, 3>> centers;
  centers.push_back(feat[rng.index(n)]);
  while (centers.size() < static_cast<std::size_t>(k)) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::max();
      for (const auto& c : centers) nearest = std::min(nearest, dist2(feat[i], c));
      if (nearest > far_d) {
        far_d = nearest;
        far = i;
      }
    }
    centers.push_back(feat[far]);
  }

  ClusterAssignment out;
  out.clusters = k;
  out.cluster_of.assign(n, 0);
  out.schedules.assign(static_cast<std::size_t>(k), base_schedule);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(feat[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(feat[i], centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.cluster_of[i] != best) {
        out.cluster_of[i] = best;
        changed = true;
      }
    }

    std::vector<std::array<double, 3>> sums(static_cast<std::size_t>(k), {0, 0, 0});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(out.cluster_of[i]);
      for (std::size_t d = 0; d < 3; ++d) sums[c][d] += feat[i][d];
      ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c);
      if (counts[cc] == 0) {
        // Re-seed an empty cluster from the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d =
              dist2(feat[i],
                    centers[static_cast<std::size_t>(out.cluster_of[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[cc] = feat[far];
        out.cluster_of[far] = c;
        changed = true;
        continue;
      }
      for (std::size_t d = 0; d < 3; ++d) {
        centers[cc][d] = sums[cc][d] / static_cast<double>(counts[cc]);
      }
    }
    if (!changed && iter > 0) break;
  }
  return out;
}

std::vector<DeliveryRequest> broadcast_global(const ModelParams& model,
                                              std::span<const int> targets,
                                              const BlockIndex& index) {
  if (index.total_len != model.size()) {
    throw ShapeError("block index does not match the model");
  }
  const std::uint64_t bytes = kMessageHeaderBytes +
                              static_cast<std::uint64_t>(index.count()) * kBlockHeaderBytes +
                              full_precision_payload_bytes(model.size());
  std::vector<DeliveryRequest> out;
  out.reserve(targets.size());
  for (int t : targets) out.push_back({t, bytes});
  return out;
}

}  // namespace acesync
