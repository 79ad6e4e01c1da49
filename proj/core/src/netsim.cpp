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

#include "acesync/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "acesync/rng.hpp"

namespace acesync {

namespace {

constexpr double kMeanReversion = 0.2;

void validate_trace(const BandwidthTrace& trace, const std::string& context) {
  if (trace.samples.empty()) {
    throw ParseError(context + ": trace has no samples");
  }
  if (trace.samples.front().t_s != 0.0) {
    throw ParseError(context + ": first sample must be at t_s = 0");
  }
  double prev = -1.0;
  for (const TraceSample& s : trace.samples) {
    if (s.t_s <= prev) {
      throw ParseError(context + ": sample times must be strictly increasing");
    }
    if (!(s.bandwidth_mbps > 0.0) || s.latency_ms < 0.0) {
      throw ParseError(context + ": bandwidth must be > 0 and latency >= 0");
    }
    prev = s.t_s;
  }
}

}  // namespace

void TraceSpec::validate() const {
  if (!(step_s > 0.0) || duration_s < 0.0) {
    throw ConfigError("trace spec requires step_s > 0 and duration_s >= 0");
  }
  if (!(bw_lo >= 5.0 && bw_lo <= bw_hi && bw_hi <= 200.0)) {
    throw ConfigError("bandwidth range must lie within [5, 200] Mbps");
  }
  if (!(lat_lo >= 10.0 && lat_lo <= lat_hi && lat_hi <= 300.0)) {
    throw ConfigError("latency range must lie within [10, 300] ms");
  }
  if (jitter_sigma < 0.0) throw ConfigError("jitter_sigma must be >= 0");
}

BandwidthTrace gen_trace(const TraceSpec& spec, std::uint64_t seed, int device_id) {
  spec.validate();
  Rng rng(seed);
  const double bw_mid = 0.5 * (spec.bw_lo + spec.bw_hi);
  const double lat_mid = 0.5 * (spec.lat_lo + spec.lat_hi);
  const double bw_sigma = spec.jitter_sigma * (spec.bw_hi - spec.bw_lo);
  const double lat_sigma = spec.jitter_sigma * (spec.lat_hi - spec.lat_lo);

  BandwidthTrace trace;
  trace.device_id = device_id;
  double bw = bw_mid;
  double lat = lat_mid;
  const std::size_t steps =
      static_cast<std::size_t>(std::floor(spec.duration_s / spec.step_s)) + 1;
  for (std::size_t i = 0; i < steps; ++i) {
    trace.samples.push_back(
        {static_cast<double>(i) * spec.step_s, bw, lat});
    bw = std::clamp(bw + kMeanReversion * (bw_mid - bw) + bw_sigma * rng.normal(),
                    spec.bw_lo, spec.bw_hi);
    lat = std::clamp(lat + kMeanReversion * (lat_mid - lat) + lat_sigma * rng.normal(),
                     spec.lat_lo, spec.lat_hi);
  }
  return trace;
}

void save_traces(std::span<const BandwidthTrace> traces, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trace file for writing: " + path);
  out << "device_id,t_s,bandwidth_mbps,latency_ms\n";
  std::vector<std::size_t> order(traces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return traces[a].device_id < traces[b].device_id;
  });
  char buf[128];
  for (std::size_t i : order) {
    for (const TraceSample& s : traces[i].samples) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", traces[i].device_id,
                    s.t_s, s.bandwidth_mbps, s.latency_ms);
      out << buf;
    }
  }
  if (!out) throw IoError("failed writing trace file: " + path);
}

std::vector<BandwidthTrace> load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path + ":1: missing header (empty file)");
  }
  if (line != "device_id,t_s,bandwidth_mbps,latency_ms") {
    throw ParseError(path + ":1: unexpected trace header");
  }
  std::vector<BandwidthTrace> traces;
  std::size_t line_no = 1;
  int prev_device = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    double values[3];
    int device = 0;
    if (!std::getline(row, field, ',')) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed row");
    }
    try {
      device = std::stoi(field);
      for (double& v : values) {
        if (!std::getline(row, field, ',')) throw std::invalid_argument("short row");
        v = std::stod(field);
      }
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (traces.empty() || device != prev_device) {
      if (device < prev_device) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": rows must be sorted by device_id");
      }
      traces.push_back(BandwidthTrace{device, {}});
      prev_device = device;
    }
    BandwidthTrace& t = traces.back();
    if (!t.samples.empty() && values[0] <= t.samples.back().t_s) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": t_s must be strictly increasing per device");
    }
    t.samples.push_back({values[0], values[1], values[2]});
  }
  if (traces.empty()) {
    throw ParseError(path + ": no trace rows (missing t=0 sample)");
  }
  for (const BandwidthTrace& t : traces) {
    validate_trace(t, path + " (device " + std::to_string(t.device_id) + ")");
  }
  return traces;
}

void save_trace(const BandwidthTrace& trace, const std::string& path) {
  save_traces(std::span<const BandwidthTrace>(&trace, 1), path);
}

BandwidthTrace load_trace(const std::string& path) {
  std::vector<BandwidthTrace> traces = load_traces(path);
  if (traces.size() != 1) {
    throw ParseError(path + ": expected a single-device trace file");
  }
  return std::move(traces.front());
}

TraceSample sample_bandwidth(const BandwidthTrace& trace, double t) {
  if (t < 0.0) throw ConfigError("trace query time must be >= 0");
  if (trace.samples.empty()) throw ConfigError("trace has no samples");
  // Last sample with t_s <= t.
  std::size_t lo = 0;
  std::size_t hi = trace.samples.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (trace.samples[mid].t_s <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return trace.samples[lo];
}

NetSim::NetSim(std::vector<BandwidthTrace> traces) : traces_(std::move(traces)) {
  for (const BandwidthTrace& t : traces_) {
    validate_trace(t, "netsim trace " + std::to_string(t.device_id));
  }
}

const BandwidthTrace& NetSim::trace_of(int device) const {
  for (const BandwidthTrace& t : traces_) {
    if (t.device_id == device) return t;
  }
  throw ConfigError("unknown device id " + std::to_string(device));
}

NetEvent NetSim::transmit(int src, int dst, std::uint64_t bytes, double t_now) {
  const int edge = src == kCloudId ? dst : src;
  const BandwidthTrace& trace = trace_of(edge);
  const TraceSample link = sample_bandwidth(trace, t_now);
  const double delay = link.latency_ms / 1000.0 +
                       static_cast<double>(bytes) * 8.0 / (link.bandwidth_mbps * 1e6);
  NetEvent ev;
  ev.time = t_now + delay;
  ev.seq = next_seq_++;
  ev.kind = EventKind::kTransferComplete;
  ev.payload = {src, dst, bytes};
  counters_[{src, dst}] += bytes;
  queue_.push(ev);
  ++scheduled_;
  return ev;
}

NetEvent NetSim::schedule_control(double time, int src, int dst) {
  NetEvent ev;
  ev.time = time;
  ev.seq = next_seq_++;
  ev.kind = EventKind::kControl;
  ev.payload = {src, dst, 0};
  queue_.push(ev);
  ++scheduled_;
  return ev;
}

std::optional<NetEvent> NetSim::step() {
  if (queue_.empty()) return std::nullopt;
  NetEvent ev = queue_.top();
  queue_.pop();
  clock_ = std::max(clock_, ev.time);
  ++processed_;
  return ev;
}

void NetSim::advance_to(double t) { clock_ = std::max(clock_, t); }

std::uint64_t NetSim::bytes_between(int src, int dst) const {
  auto it = counters_.find({src, dst});
  return it == counters_.end() ? 0 : it->second;
}

std::uint64_t NetSim::total_uplink() const {
  std::uint64_t total = 0;
  for (const auto& [key, bytes] : counters_) {
    if (key.second == kCloudId) total += bytes;
  }
  return total;
}

std::uint64_t NetSim::total_downlink() const {
  std::uint64_t total = 0;
  for (const auto& [key, bytes] : counters_) {
    if (key.first == kCloudId) total += bytes;
  }
  return total;
}

}  // namespace acesync
