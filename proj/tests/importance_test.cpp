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

#include "acesync/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "acesync/rng.hpp"

using namespace acesync;

namespace {

// One flat layer of n values split into blocks of block_size.
BlockIndex flat_index(std::size_t n, std::size_t block_size) {
  ModelParams m;
  m.values.assign(n, 0.0);
  m.layout.push_back({"b1", 1, 0, n, n, 0});
  return partition_blocks(m, block_size);
}

GradientVector constant_grad(std::size_t n, double value) {
  GradientVector g;
  g.values.assign(n, value);
  return g;
}

}  // namespace

TEST_CASE("grad stats: first observation seeds the EMA") {
  BlockIndex idx = flat_index(4, 2);
  GradStats stats(idx.count(), {0.9, 4});
  update_grad_stats(stats, constant_grad(4, 1.0), idx);
  CHECK(stats.ema_mag(0) == doctest::Approx(1.0));
  CHECK(stats.rounds_seen(0) == 1);
}

TEST_CASE("grad stats: EMA decay arithmetic") {
  BlockIndex idx = flat_index(2, 2);
  GradStats stats(idx.count(), {0.9, 4});
  update_grad_stats(stats, constant_grad(2, 1.0), idx);
  update_grad_stats(stats, constant_grad(2, 2.0), idx);
  CHECK(stats.ema_mag(0) == doctest::Approx(0.9 * 1.0 + 0.1 * 2.0).epsilon(1e-12));
}

TEST_CASE("grad stats: constant magnitudes give zero window variance") {
  BlockIndex idx = flat_index(6, 3);
  GradStats stats(idx.count(), {0.9, 4});
  for (int i = 0; i < 6; ++i) update_grad_stats(stats, constant_grad(6, 0.7), idx);
  CHECK(stats.variance(0) == 0.0);
  CHECK(stats.variance(1) == 0.0);
  CHECK(stats.window_count(0) == 4);  // ring capped at T
}

TEST_CASE("grad stats: variance over fewer than two entries is zero") {
  BlockIndex idx = flat_index(2, 2);
  GradStats stats(idx.count(), {0.9, 8});
  CHECK(stats.variance(0) == 0.0);
  update_grad_stats(stats, constant_grad(2, 3.0), idx);
  CHECK(stats.variance(0) == 0.0);
}

TEST_CASE("grad stats rejects shape mismatch") {
  BlockIndex idx = flat_index(4, 2);
  GradStats stats(idx.count(), {0.9, 4});
  CHECK_THROWS_AS(update_grad_stats(stats, constant_grad(5, 1.0), idx), ShapeError);
}

TEST_CASE("temporal attention closed forms") {
  BlockIndex idx = flat_index(4, 2);
  GradStats stats(idx.count(), {0.9, 4});

  // Zero weights: logistic(0) = 0.5 for every block.
  std::vector<double> s0 = temporal_attention(stats, {0.0, 0.0});
  for (double v : s0) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

  // ema = ln 3, var = 0, w1 = 1 -> logistic(ln 3) = 0.75.
  update_grad_stats(stats, constant_grad(4, std::log(3.0)), idx);
  std::vector<double> s1 = temporal_attention(stats, {1.0, 0.0});
  CHECK(s1[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("temporal attention is monotone in the EMA with w1 > 0") {
  BlockIndex idx = flat_index(2, 2);
  GradStats lo(idx.count(), {0.9, 4});
  GradStats hi(idx.count(), {0.9, 4});
  update_grad_stats(lo, constant_grad(2, 0.5), idx);
  update_grad_stats(hi, constant_grad(2, 1.5), idx);
  CHECK(temporal_attention(hi, {2.0, 0.5})[0] > temporal_attention(lo, {2.0, 0.5})[0]);
}

TEST_CASE("structural attention endpoints") {
  // Single depth level: depth_score = 1 everywhere.
  BlockIndex idx = flat_index(8, 4);
  std::vector<double> s = structural_attention(idx, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] == doctest::Approx(0.5 + 0.5 * (1.0 - idx.blocks[i].density)).epsilon(1e-12));
  }

  // Three depth levels: depth 1 scores 1, depth 3 scores 0 on the depth term.
  ModelParams m;
  m.values.assign(3, 0.0);
  m.layout.push_back({"b1", 1, 0, 1, 1, 0});
  m.layout.push_back({"b2", 2, 1, 1, 1, 0});
  m.layout.push_back({"b3", 3, 2, 1, 1, 0});
  BlockIndex idx3 = partition_blocks(m, 1);
  std::vector<double> s3 = structural_attention(idx3, 3);
  const double density_term = 0.5 * (1.0 - 1.0 / 3.0);
  CHECK(s3[0] == doctest::Approx(0.5 + density_term).epsilon(1e-12));
  CHECK(s3[1] == doctest::Approx(0.25 + density_term).epsilon(1e-12));
  CHECK(s3[2] == doctest::Approx(0.0 + density_term).epsilon(1e-12));
}

TEST_CASE("structural attention: one block covering everything scores 0.5") {
  BlockIndex idx = flat_index(10, 10);
  REQUIRE(idx.count() == 1);
  std::vector<double> s = structural_attention(idx, 1);
  CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fuse_importance endpoints and midpoint") {
  std::vector<double> temp{0.8, 0.3};
  std::vector<double> stru{0.2, 0.9};
  CHECK(fuse_importance(temp, stru, 1.0).score == temp);
  CHECK(fuse_importance(temp, stru, 0.0).score == stru);
  ImportanceScore mid = fuse_importance(temp, stru, 0.5);
  CHECK(mid.score[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(fuse_importance(temp, stru, 1.5), ConfigError);
  std::vector<double> shorter{0.1};
  CHECK_THROWS_AS(fuse_importance(temp, shorter, 0.5), ShapeError);
}

TEST_CASE("top_p_select picks the highest scores with id tie-break") {
  ImportanceScore imp;
  imp.score = {0.9, 0.1, 0.5, 0.7};
  SelectionResult sel = top_p_select(imp, 0.5);
  CHECK(sel.block_ids == std::vector<int>{0, 3});
  CHECK(sel.p.has_value());

  SelectionResult all = top_p_select(imp, 1.0);
  CHECK(all.block_ids == std::vector<int>{0, 1, 2, 3});
  CHECK(top_p_select(imp, 0.0).block_ids.empty());

  ImportanceScore ties;
  ties.score = {0.4, 0.4, 0.4, 0.4};
  CHECK(top_p_select(ties, 0.5).block_ids == std::vector<int>{0, 1});
}

TEST_CASE("top_p_select agrees with a full-sort oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(30);
    ImportanceScore imp;
    for (std::size_t i = 0; i < n; ++i) imp.score.push_back(rng.uniform01());
    const double p = rng.uniform01();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return imp.score[static_cast<std::size_t>(a)] >
             imp.score[static_cast<std::size_t>(b)];
    });
    const std::size_t k = ceil_fraction(p, n);
    std::vector<int> expected(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(expected.begin(), expected.end());

    SelectionResult sel = top_p_select(imp, p);
    CHECK(sel.block_ids == expected);
    CHECK(sel.block_ids.size() == k);
  }
}

TEST_CASE("selection cardinality is exactly ceil(p * n)") {
  for (std::size_t n : {1u, 3u, 7u, 10u, 27u}) {
    ImportanceScore imp;
    imp.score.assign(n, 0.5);
    for (double p : {0.0, 0.1, 1.0 / 3.0, 0.5, 0.75, 1.0}) {
      const double exact = p * static_cast<double>(n);
      const std::size_t expected =
          static_cast<std::size_t>(std::ceil(exact - 1e-9));
      CHECK(top_p_select(imp, p).block_ids.size() == std::min(expected, n));
    }
  }
}

TEST_CASE("positive scaling of scores never changes the selection") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(20);
    ImportanceScore imp;
    for (std::size_t i = 0; i < n; ++i) imp.score.push_back(rng.uniform01());
    ImportanceScore scaled = imp;
    const double factor = 0.1 + 2.0 * rng.uniform01();
    for (double& s : scaled.score) s *= factor;
    const double p = rng.uniform01();
    CHECK(top_p_select(imp, p).block_ids == top_p_select(scaled, p).block_ids);
  }
}

TEST_CASE("fused scores stay in [0, 1]") {
  Rng rng(29);
  BlockIndex idx = flat_index(64, 8);
  GradStats stats(idx.count(), {0.9, 8});
  for (int round = 0; round < 20; ++round) {
    GradientVector g;
    for (std::size_t i = 0; i < 64; ++i) g.values.push_back(rng.normal() * 3.0);
    update_grad_stats(stats, g, idx);
    std::vector<double> temp = temporal_attention(stats, {4.0, 1.0});
    std::vector<double> stru = structural_attention(idx, 1);
    ImportanceScore fused = fuse_importance(temp, stru, 0.7);
    for (std::size_t b = 0; b < fused.score.size(); ++b) {
      CHECK(temp[b] > 0.0);
      CHECK(temp[b] < 1.0);
      CHECK(stru[b] >= 0.0);
      CHECK(stru[b] <= 1.0);
      CHECK(fused.score[b] >= 0.0);
      CHECK(fused.score[b] <= 1.0);
    }
  }
}

TEST_CASE("calibration fixed points") {
  BlockIndex idx = flat_index(4, 2);
  GradStats stats(idx.count(), {0.9, 4});

  // All-zero gradients: untouched.
  update_grad_stats(stats, constant_grad(4, 0.0), idx);
  TemporalAttentionParams params{4.0, 1.0};
  TemporalAttentionParams after = calibrate_attention(params, stats);
  CHECK(after.w1 == params.w1);
  CHECK(after.w2 == params.w2);
}

TEST_CASE("calibration drives the mean pre-activation toward zero") {
  BlockIndex idx = flat_index(4, 2);
  GradStats stats(idx.count(), {0.9, 4});
  for (int i = 0; i < 4; ++i) update_grad_stats(stats, constant_grad(4, 2.0), idx);

  TemporalAttentionParams params{4.0, 1.0};
  auto mean_pre = [&](const TemporalAttentionParams& w) {
    double total = 0.0;
    for (std::size_t b = 0; b < stats.block_count(); ++b) {
      total += w.w1 * stats.ema_mag(b) + w.w2 * stats.variance(b);
    }
    return total / static_cast<double>(stats.block_count());
  };

  double prev = std::abs(mean_pre(params));
  int iters = 0;
  while (std::abs(mean_pre(params)) >= 0.1 && iters < 200) {
    params = calibrate_attention(params, stats);
    const double cur = std::abs(mean_pre(params));
    CHECK(cur < prev);
    prev = cur;
    ++iters;
  }
  CHECK(std::abs(mean_pre(params)) < 0.1);

  // At the fixed point the parameters stop moving.
  TemporalAttentionParams zeroed{0.0, 0.0};
  TemporalAttentionParams same = calibrate_attention(zeroed, stats);
  CHECK(same.w1 == 0.0);
}
