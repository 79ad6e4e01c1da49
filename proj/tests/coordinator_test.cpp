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

#include <doctest.h>

#include "acesync/rng.hpp"

using namespace acesync;

namespace {

BlockIndex flat_index(std::size_t n, std::size_t block_size) {
  ModelParams m;
  m.values.assign(n, 0.0);
  m.layout.push_back({"b1", 1, 0, n, n, 0});
  return partition_blocks(m, block_size);
}

DeviceProfile profile(int id, std::uint64_t size, double reliability,
                      double compute = 0.002) {
  DeviceProfile p;
  p.device_id = id;
  p.trace_id = id;
  p.dataset_size = size;
  p.reliability = reliability;
  p.compute_time_per_batch_s = compute;
  return p;
}

BandwidthTrace flat_trace(int id, double mbps, double latency_ms = 50.0) {
  BandwidthTrace t;
  t.device_id = id;
  t.samples.push_back({0.0, mbps, latency_ms});
  return t;
}

ModelParams tiny_model(std::vector<double> values) {
  ModelParams m;
  const std::size_t n = values.size();
  m.values = std::move(values);
  m.layout.push_back({"b1", 1, 0, n, n, 0});
  return m;
}

}  // namespace

TEST_CASE("device weights normalize size times reliability") {
  std::vector<DeviceProfile> profiles{profile(0, 100, 1.0), profile(1, 300, 1.0)};
  DeviceWeight w = device_weights(profiles);
  CHECK(w.omega[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.omega[1] == doctest::Approx(0.75).epsilon(1e-12));

  std::vector<DeviceProfile> equal{profile(0, 10, 0.5), profile(1, 10, 0.5),
                                   profile(2, 10, 0.5), profile(3, 10, 0.5)};
  DeviceWeight we = device_weights(equal);
  for (double x : we.omega) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<DeviceProfile> single{profile(0, 7, 0.3)};
  CHECK(device_weights(single).omega[0] == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<DeviceProfile> dead{profile(0, 5, 0.0), profile(1, 5, 0.0)};
  CHECK_THROWS_AS(device_weights(dead), ConfigError);
  CHECK(device_weights(dead, WeightMode::kSizeOnly).omega[0] ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("device weights sum to one for random profiles") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DeviceProfile> profiles;
    const std::size_t k = 1 + rng.index(12);
    for (std::size_t i = 0; i < k; ++i) {
      profiles.push_back(profile(static_cast<int>(i), 1 + rng.index(1000),
                                 0.05 + 0.95 * rng.uniform01()));
    }
    DeviceWeight w = device_weights(profiles);
    double total = 0.0;
    for (double x : w.omega) total += x;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("reconstruct_update with full payloads is exact") {
  BlockIndex idx = flat_index(4, 2);
  GradientCache cache(1, idx.count(), 0.0);
  std::vector<TransmittedBlock> payload(2);
  payload[0].block_id = 0;
  payload[0].values = {1.5, -2.5};
  payload[1].block_id = 1;
  payload[1].values = {0.25, 4.0};
  std::vector<double> out = reconstruct_update(payload, cache, idx, 0, 1);
  CHECK(out == std::vector<double>{1.5, -2.5, 0.25, 4.0});

  // Cache coherence: entries equal the payload bit-for-bit.
  CHECK(*cache.lookup(0, 0) == std::vector<double>{1.5, -2.5});
  CHECK(*cache.lookup(0, 1) == std::vector<double>{0.25, 4.0});
  CHECK(cache.round_received(0, 1) == 1);
}

TEST_CASE("reconstruct_update fills missing blocks from the cache") {
  BlockIndex idx = flat_index(4, 2);

  SUBCASE("lambda = 0 leaves missing blocks zero") {
    GradientCache cache(1, idx.count(), 0.0);
    std::vector<TransmittedBlock> payload(1);
    payload[0].block_id = 0;
    payload[0].values = {1.0, 1.0};
    std::vector<double> out = reconstruct_update(payload, cache, idx, 0, 1);
    CHECK(out == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  }

  SUBCASE("lambda = 0.5 halves the cached value") {
    GradientCache cache(1, idx.count(), 0.5);
    cache.store(0, 1, {2.0, 2.0}, 1);
    std::vector<double> out =
        reconstruct_update(std::vector<TransmittedBlock>{}, cache, idx, 0, 2);
    CHECK(out == std::vector<double>{0.0, 0.0, 1.0, 1.0});
  }

  SUBCASE("unknown block id is a protocol error") {
    GradientCache cache(1, idx.count(), 0.0);
    std::vector<TransmittedBlock> payload(1);
    payload[0].block_id = 9;
    payload[0].values = {1.0, 1.0};
    CHECK_THROWS_AS(reconstruct_update(payload, cache, idx, 0, 1), ProtocolError);
  }

  SUBCASE("quantized payloads are dequantized in place") {
    GradientCache cache(1, idx.count(), 0.0);
    std::vector<TransmittedBlock> payload(1);
    payload[0].block_id = 1;
    payload[0].full_precision = false;
    payload[0].quantized = quantize_block(std::vector<double>{0.3, -0.4}, 2, 1);
    std::vector<double> out = reconstruct_update(payload, cache, idx, 0, 3);
    CHECK(out[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(out[3] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK((*cache.lookup(0, 1))[0] == out[2]);
  }
}

TEST_CASE("aggregate weighted sums") {
  std::vector<GradientVector> updates(2);
  updates[0].values = {2.0, 0.0};
  updates[1].values = {0.0, 2.0};

  DeviceWeight equal{{0.5, 0.5}};
  CHECK(aggregate(updates, equal).values == std::vector<double>{1.0, 1.0});

  DeviceWeight skew{{0.75, 0.25}};
  CHECK(aggregate(updates, skew).values == std::vector<double>{1.5, 0.5});

  std::vector<GradientVector> one(1);
  one[0].values = {3.0, -1.0};
  DeviceWeight unit{{1.0}};
  CHECK(aggregate(one, unit).values == one[0].values);

  // One-hot weights pick out that device exactly.
  DeviceWeight hot{{0.0, 1.0}};
  CHECK(aggregate(updates, hot).values == updates[1].values);

  updates[1].values.resize(3);
  CHECK_THROWS_AS(aggregate(updates, equal), ShapeError);
}

TEST_CASE("aggregation is linear in the updates") {
  Rng rng(7);
  std::vector<GradientVector> updates(3);
  std::vector<GradientVector> scaled(3);
  for (std::size_t k = 0; k < 3; ++k) {
    for (int i = 0; i < 5; ++i) updates[k].values.push_back(rng.normal());
    scaled[k].values = updates[k].values;
    for (double& x : scaled[k].values) x *= 2.5;
  }
  DeviceWeight w{{0.2, 0.3, 0.5}};
  GradientVector a = aggregate(updates, w);
  GradientVector b = aggregate(scaled, w);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.values[i] == doctest::Approx(2.5 * a.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("divergence is the euclidean distance") {
  ModelParams a = tiny_model({1.0, 2.0});
  ModelParams b = tiny_model({1.0, 2.0});
  CHECK(compute_divergence(a, b) == 0.0);

  ModelParams c = tiny_model({4.0, 6.0});
  CHECK(compute_divergence(c, a) == doctest::Approx(5.0).epsilon(1e-12));  // (3, 4)

  // Scaling the difference scales the norm.
  ModelParams d = tiny_model({1.0 + 6.0, 2.0 + 8.0});
  CHECK(compute_divergence(d, a) == doctest::Approx(10.0).epsilon(1e-12));

  ModelParams e = tiny_model({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(compute_divergence(e, a), ShapeError);
}

TEST_CASE("sync interval control") {
  DivergenceReport r;
  r.tau = 1.0;
  r.interval_min = 1;
  r.interval_max = 8;

  r.divergence = {0.1};
  r.sync_interval = 4;
  CHECK(adjust_sync_interval(r).sync_interval == 5);

  r.divergence = {2.0};
  CHECK(adjust_sync_interval(r).sync_interval == 2);

  r.sync_interval = 1;
  CHECK(adjust_sync_interval(r).sync_interval == 1);  // clamped at I_min

  r.divergence = {0.0};
  r.sync_interval = 8;
  CHECK(adjust_sync_interval(r).sync_interval == 8);  // clamped at I_max
}

TEST_CASE("clustering recovers well-separated groups") {
  std::vector<DeviceProfile> profiles;
  std::vector<BandwidthTrace> traces;
  for (int i = 0; i < 6; ++i) {
    const bool fast = i < 3;
    profiles.push_back(profile(i, 1000, 1.0, fast ? 0.001 : 0.001));
    traces.push_back(flat_trace(i, fast ? 190.0 : 10.0));
  }
  ClusterAssignment a = cluster_devices(profiles, traces, 2, 9);
  CHECK(a.cluster_of[0] == a.cluster_of[1]);
  CHECK(a.cluster_of[1] == a.cluster_of[2]);
  CHECK(a.cluster_of[3] == a.cluster_of[4]);
  CHECK(a.cluster_of[4] == a.cluster_of[5]);
  CHECK(a.cluster_of[0] != a.cluster_of[3]);

  // Matches the best 2-partition found by brute force over assignments.
  double best_cost = 1e300;
  std::vector<int> best;
  for (int mask = 0; mask < (1 << 6); ++mask) {
    std::vector<int> assign(6);
    std::array<double, 2> sum{0.0, 0.0};
    std::array<int, 2> count{0, 0};
    for (int i = 0; i < 6; ++i) {
      assign[static_cast<std::size_t>(i)] = (mask >> i) & 1;
      const double bw = traces[static_cast<std::size_t>(i)].samples[0].bandwidth_mbps;
      sum[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] += bw;
      ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    if (count[0] == 0 || count[1] == 0) continue;
    double cost = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double bw = traces[static_cast<std::size_t>(i)].samples[0].bandwidth_mbps;
      const std::size_t c = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
      const double mean = sum[c] / count[c];
      cost += (bw - mean) * (bw - mean);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = assign;
    }
  }
  const bool same_as_best =
      (a.cluster_of == best) ||
      [&] {
        std::vector<int> flipped = best;
        for (int& x : flipped) x = 1 - x;
        return a.cluster_of == flipped;
      }();
  CHECK(same_as_best);
}

TEST_CASE("clustering edge cases and determinism") {
  std::vector<DeviceProfile> profiles;
  std::vector<BandwidthTrace> traces;
  for (int i = 0; i < 5; ++i) {
    profiles.push_back(profile(i, 100 + static_cast<std::uint64_t>(i) * 50, 1.0,
                               0.001 * (i + 1)));
    traces.push_back(flat_trace(i, 20.0 + 40.0 * i));
  }

  ClusterAssignment one = cluster_devices(profiles, traces, 1, 4);
  for (int c : one.cluster_of) CHECK(c == 0);

  ClusterAssignment each = cluster_devices(profiles, traces, 5, 4);
  std::vector<int> sorted = each.cluster_of;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4});

  ClusterAssignment again = cluster_devices(profiles, traces, 3, 11);
  ClusterAssignment again2 = cluster_devices(profiles, traces, 3, 11);
  CHECK(again.cluster_of == again2.cluster_of);

  CHECK_THROWS_AS(cluster_devices(profiles, traces, 6, 1), ConfigError);
  CHECK_THROWS_AS(cluster_devices(profiles, traces, 0, 1), ConfigError);
}

TEST_CASE("cluster members share a schedule that can be overridden") {
  std::vector<DeviceProfile> profiles{profile(0, 100, 1.0), profile(1, 100, 1.0)};
  std::vector<BandwidthTrace> traces{flat_trace(0, 20.0), flat_trace(1, 180.0)};
  CompressionSchedule base;
  base.beta = 0.02;
  ClusterAssignment a = cluster_devices(profiles, traces, 2, 1, base);
  REQUIRE(a.schedules.size() == 2);
  CHECK(a.schedule_of(0).beta == 0.02);
  CHECK(a.schedule_of(1).beta == 0.02);

  a.schedules[static_cast<std::size_t>(a.cluster_of[0])].beta = 0.1;
  CHECK(a.schedule_of(0).beta == 0.1);
  CHECK(a.schedule_of(1).beta == 0.02);  // other cluster untouched
}

TEST_CASE("broadcast accounting") {
  ModelParams m = init_model(std::vector<std::size_t>{4, 3}, 1);
  BlockIndex idx = partition_blocks(m, 8);

  CHECK(broadcast_global(m, std::vector<int>{}, idx).empty());

  std::vector<int> targets{0, 1, 2};
  std::vector<DeliveryRequest> reqs = broadcast_global(m, targets, idx);
  REQUIRE(reqs.size() == 3);
  const std::uint64_t expected =
      16 + static_cast<std::uint64_t>(idx.count()) * 8 + 4 * m.size();
  for (const DeliveryRequest& r : reqs) CHECK(r.bytes == expected);
}
