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
// Deterministic discrete-event simulation of the cloud-edge links: per-device
// bandwidth/latency traces, store-and-forward transfer delays, and exact byte
// counters. Mbps and MB are decimal (1e6) throughout.

#ifndef ACESYNC_NETSIM_HPP_
#define ACESYNC_NETSIM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "acesync/errors.hpp"

namespace acesync {

struct TraceSample {
  double t_s = 0.0;
  double bandwidth_mbps = 0.0;
  double latency_ms = 0.0;
};

struct BandwidthTrace {
  int device_id = 0;
  std::vector<TraceSample> samples;
};

struct TraceSpec {
  double duration_s = 600.0;
  double step_s = 1.0;
  double bw_lo = 5.0;
  double bw_hi = 200.0;
  double lat_lo = 10.0;
  double lat_hi = 300.0;
  double jitter_sigma = 0.05;  // relative to each range span

  void validate() const;
};

struct DeviceProfile {
  int device_id = 0;
  double compute_time_per_batch_s = 0.001;
  std::uint64_t dataset_size = 1;
  double reliability = 1.0;
  int trace_id = 0;
};

enum class EventKind { kTransferComplete, kControl };

struct Message {
  int src = 0;
  int dst = 0;
  std::uint64_t bytes = 0;
};

struct NetEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kTransferComplete;
  Message payload;
};

// Piecewise-constant mean-reverting walk clamped to the spec ranges; a zero
// jitter_sigma collapses to the range midpoints.
BandwidthTrace gen_trace(const TraceSpec& spec, std::uint64_t seed, int device_id = 0);

// CSV `device_id,t_s,bandwidth_mbps,latency_ms`, rows sorted by
// (device_id, t_s), first row per device at t_s = 0.
void save_traces(std::span<const BandwidthTrace> traces, const std::string& path);
std::vector<BandwidthTrace> load_traces(const std::string& path);
void save_trace(const BandwidthTrace& trace, const std::string& path);
BandwidthTrace load_trace(const std::string& path);

// Step-function lookup: the latest sample with sample.t <= t; queries past the
// end return the last sample.
TraceSample sample_bandwidth(const BandwidthTrace& trace, double t);

class NetSim {
 public:
  static constexpr int kCloudId = -1;

  explicit NetSim(std::vector<BandwidthTrace> traces);

  // Schedules a transfer completing at
  // t_now + latency_ms/1000 + bytes*8/(bandwidth_mbps*1e6), with the link
  // conditions frozen at send time. The edge endpoint's trace characterizes
  // the link in both directions.
  NetEvent transmit(int src, int dst, std::uint64_t bytes, double t_now);

  NetEvent schedule_control(double time, int src = kCloudId, int dst = kCloudId);

  // Pops the minimum-(time, seq) event; nullopt once the queue is empty.
  std::optional<NetEvent> step();

  // Advances the clock without an event (e.g. compute-only rounds).
  void advance_to(double t);

  double now() const { return clock_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t processed_count() const { return processed_; }

  std::uint64_t bytes_between(int src, int dst) const;
  std::uint64_t total_uplink() const;    // devices -> cloud
  std::uint64_t total_downlink() const;  // cloud -> devices

  const BandwidthTrace& trace_of(int device) const;
  std::size_t device_count() const { return traces_.size(); }

 private:
  struct Later {
    bool operator()(const NetEvent& a, const NetEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::vector<BandwidthTrace> traces_;
  std::priority_queue<NetEvent, std::vector<NetEvent>, Later> queue_;
  std::map<std::pair<int, int>, std::uint64_t> counters_;
  double clock_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t scheduled_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace acesync

#endif  // ACESYNC_NETSIM_HPP_
