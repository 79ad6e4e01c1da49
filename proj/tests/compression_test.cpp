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

#include "acesync/compression.hpp"

#include <cmath>
#include <limits>

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

}  // namespace

TEST_CASE("schedule_ratio endpoints and closed form") {
  CompressionSchedule sched{0.01, 0.5, 0.02, 2, 16};
  CHECK(schedule_ratio(0.0, sched) == doctest::Approx(0.5).epsilon(1e-15));
  // beta * B = 50: exp term vanishes to c_min within 1e-15.
  CHECK(schedule_ratio(2500.0, sched) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(schedule_ratio(100.0, sched) ==
        doctest::Approx(0.01 + 0.49 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(schedule_ratio(100.0, sched) == doctest::Approx(0.07632).epsilon(1e-3));
}

TEST_CASE("schedule_ratio stays in bounds and decreases in bandwidth") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    CompressionSchedule sched;
    sched.c_min = 0.01 + 0.3 * rng.uniform01();
    sched.c_max = sched.c_min + (1.0 - sched.c_min) * rng.uniform01();
    sched.beta = 0.1 * rng.uniform01();
    const double b1 = 200.0 * rng.uniform01();
    const double b2 = 200.0 * rng.uniform01();
    const double c1 = schedule_ratio(std::min(b1, b2), sched);
    const double c2 = schedule_ratio(std::max(b1, b2), sched);
    CHECK(c1 >= sched.c_min);
    CHECK(c1 <= sched.c_max);
    CHECK(c2 >= sched.c_min);
    CHECK(c2 <= sched.c_max);
    CHECK(c1 >= c2);
  }
}

TEST_CASE("ratio_to_bits clamps and rounds") {
  CompressionSchedule sched{0.001, 1.0, 0.01, 2, 16};
  CHECK(ratio_to_bits(1.0, sched) == 2);
  CHECK(ratio_to_bits(0.0001, sched) == 16);
  CHECK(ratio_to_bits(0.5, sched) == 8);
  // More compression never yields more bits.
  int prev = 17;
  for (double c = 0.01; c <= 1.0; c += 0.01) {
    const int b = ratio_to_bits(c, sched);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("quantize_block hand-worked example") {
  const std::vector<double> g{0.3, -0.4};
  QuantizedBlock qb = quantize_block(g, 2, 17);
  CHECK(qb.block_id == 17);
  CHECK(qb.scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(qb.levels[0] == 2);  // round(0.6 * 3)
  CHECK(qb.levels[1] == 2);  // round(0.8 * 3)
  CHECK(qb.signs[0] == 0);
  CHECK(qb.signs[1] == 1);

  std::vector<double> back = dequantize_block(qb);
  CHECK(back[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("quantize_block zero block") {
  const std::vector<double> g{0.0, 0.0};
  QuantizedBlock qb = quantize_block(g, 4);
  CHECK(qb.scale == 0.0);
  CHECK(qb.levels == std::vector<std::uint16_t>{0, 0});
  CHECK(dequantize_block(qb) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("quantize_block rejects bad input") {
  const std::vector<double> g{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(quantize_block(g, 4), NumericError);
  CHECK_THROWS_AS(quantize_block(std::vector<double>{}, 4), ShapeError);
  CHECK_THROWS_AS(quantize_block(std::vector<double>{1.0}, 1), ConfigError);
  CHECK_THROWS_AS(quantize_block(std::vector<double>{1.0}, 17), ConfigError);
}

TEST_CASE("round-trip of an exactly representable vector is the identity") {
  // (0.6, 0.8) scaled: levels 9 and 12 out of 15 are exact at 4 bits.
  const std::vector<double> g{0.6 * 2.5, -0.8 * 2.5};
  QuantizedBlock qb = quantize_block(g, 4);
  std::vector<double> back = dequantize_block(qb);
  CHECK(back[0] == doctest::Approx(g[0]).epsilon(1e-12));
  CHECK(back[1] == doctest::Approx(g[1]).epsilon(1e-12));

  // One-hot vectors hit the top level exactly.
  const std::vector<double> hot{0.0, -3.25, 0.0};
  std::vector<double> hot_back = dequantize_block(quantize_block(hot, 2));
  CHECK(hot_back[1] == doctest::Approx(-3.25).epsilon(1e-12));
  CHECK(hot_back[0] == 0.0);
}

TEST_CASE("quantization error bound and sign preservation") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng.index(64);
    std::vector<double> g(len);
    for (double& x : g) x = rng.normal() * (0.01 + 10.0 * rng.uniform01());
    const int bits = 2 + static_cast<int>(rng.index(15));
    QuantizedBlock qb = quantize_block(g, bits);
    std::vector<double> back = dequantize_block(qb);
    const double bound =
        qb.scale / (2.0 * static_cast<double>((1u << bits) - 1)) + 1e-12;
    for (std::size_t i = 0; i < len; ++i) {
      CHECK(std::abs(back[i] - g[i]) <= bound);
      if (back[i] != 0.0) {
        CHECK(std::signbit(back[i]) == std::signbit(g[i]));
      }
    }
  }
}

TEST_CASE("error feedback correction arithmetic") {
  GradientVector g;
  g.values = {1.0, -1.0};
  ErrorFeedbackState ef(2, 0.9);
  CHECK(apply_error_feedback(g, ef).values == g.values);  // e = 0

  ef.residual = {0.5, 0.5};
  GradientVector corrected = apply_error_feedback(g, ef);
  CHECK(corrected.values[0] == doctest::Approx(1.45).epsilon(1e-12));
  CHECK(corrected.values[1] == doctest::Approx(-0.55).epsilon(1e-12));

  ErrorFeedbackState off(2, 0.0);
  off.residual = {0.5, 0.5};
  CHECK(apply_error_feedback(g, off).values == g.values);  // gamma = 0

  ErrorFeedbackState bad(3, 0.9);
  CHECK_THROWS_AS(apply_error_feedback(g, bad), ShapeError);
}

TEST_CASE("residual accumulation") {
  ErrorFeedbackState ef(2, 0.9);
  GradientVector corrected;
  corrected.values = {2.0, -1.0};

  accumulate_residual(ef, corrected, corrected);  // everything sent exactly
  CHECK(ef.residual == std::vector<double>{0.0, 0.0});

  GradientVector nothing;
  nothing.values = {0.0, 0.0};
  accumulate_residual(ef, corrected, nothing);
  CHECK(ef.residual == corrected.values);
}

TEST_CASE("error-feedback conservation across rounds") {
  Rng rng(13);
  const std::size_t n = 32;
  ErrorFeedbackState ef(n, 0.9);
  for (int round = 0; round < 50; ++round) {
    GradientVector g;
    for (std::size_t i = 0; i < n; ++i) g.values.push_back(rng.normal());
    const std::vector<double> residual_prev = ef.residual;
    GradientVector corrected = apply_error_feedback(g, ef);
    // Quantize the whole vector as one block to get a lossy "sent".
    GradientVector sent;
    sent.values = dequantize_block(quantize_block(corrected.values, 3));
    accumulate_residual(ef, corrected, sent);
    for (std::size_t i = 0; i < n; ++i) {
      const double lhs = ef.residual[i] + sent.values[i] - 0.9 * residual_prev[i];
      CHECK(std::abs(lhs - g.values[i]) <= 1e-12);
    }
  }
}

TEST_CASE("payload framing bytes") {
  BlockIndex idx = flat_index(300, 100);  // 3 blocks of 100
  std::vector<int> bits(idx.count(), 4);

  SelectionResult empty;
  CHECK(payload_size(empty, idx, bits, empty) == 16);

  SelectionResult one;
  one.block_ids = {0};
  SelectionResult fp_all;
  fp_all.block_ids = {0, 1, 2};
  CHECK(payload_size(one, idx, bits, fp_all) == 16 + 8 + 400);

  // Quantized: 4 (scale) + ceil(100 * 5 / 8) = 4 + 63.
  CHECK(payload_size(one, idx, bits, empty) == 16 + 8 + 4 + 63);
  CHECK(payload_size(one, idx, bits, empty) == 91);
}

TEST_CASE("fullsync framing formula for random layouts") {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 10 + rng.index(2000);
    const std::size_t bs = 1 + rng.index(128);
    BlockIndex idx = flat_index(n, bs);
    std::vector<int> bits(idx.count(), 8);
    SelectionResult all;
    for (std::size_t i = 0; i < idx.count(); ++i) all.block_ids.push_back(static_cast<int>(i));
    CHECK(payload_size(all, idx, bits, all) ==
          16 + static_cast<std::uint64_t>(idx.count()) * 8 + 4 * static_cast<std::uint64_t>(n));
  }
}
