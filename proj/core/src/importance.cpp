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

namespace acesync {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kCalibrationStep = 0.1;
constexpr double kCalibrationEps = 1e-8;

}  // namespace

GradStats::GradStats(std::size_t n_blocks, GradStatsConfig cfg)
    : cfg_(cfg), n_blocks_(n_blocks) {
  if (cfg_.window == 0) throw ConfigError("stats window must be >= 1");
  if (cfg_.rho < 0.0 || cfg_.rho >= 1.0) {
    throw ConfigError("stats rho must be in [0, 1)");
  }
  ema_.assign(n_blocks_, 0.0);
  ring_.assign(n_blocks_ * cfg_.window, 0.0);
  rounds_seen_.assign(n_blocks_, 0);
}

std::size_t GradStats::window_count(std::size_t block) const {
  return static_cast<std::size_t>(
      std::min<std::uint64_t>(rounds_seen_[block], cfg_.window));
}

double GradStats::variance(std::size_t block) const {
  const std::size_t count = window_count(block);
  if (count < 2) return 0.0;
  const double* w = ring_.data() + block * cfg_.window;
  double mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) mean += w[i];
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = w[i] - mean;
    var += d * d;
  }
  return var / static_cast<double>(count);
}

void GradStats::update(const GradientVector& grad, const BlockIndex& index) {
  if (index.count() != n_blocks_ || grad.size() != index.total_len) {
    throw ShapeError("gradient/index shape does not match the stats layout");
  }
  for (const Block& b : index.blocks) {
    double mean = 0.0;
    for (std::size_t i = 0; i < b.len; ++i) {
      mean += std::abs(grad.values[b.offset + i]);
    }
    mean /= static_cast<double>(b.len);

    const std::size_t id = static_cast<std::size_t>(b.block_id);
    if (rounds_seen_[id] == 0) {
      ema_[id] = mean;
    } else {
      ema_[id] = cfg_.rho * ema_[id] + (1.0 - cfg_.rho) * mean;
    }
    ring_[id * cfg_.window + rounds_seen_[id] % cfg_.window] = mean;
    ++rounds_seen_[id];
  }
}

void update_grad_stats(GradStats& stats, const GradientVector& grad,
                       const BlockIndex& index) {
  stats.update(grad, index);
}

std::vector<double> temporal_attention(const GradStats& stats,
                                       const TemporalAttentionParams& params) {
  std::vector<double> scores(stats.block_count(), 0.0);
  for (std::size_t b = 0; b < stats.block_count(); ++b) {
    scores[b] = logistic(params.w1 * stats.ema_mag(b) + params.w2 * stats.variance(b));
  }
  return scores;
}

std::vector<double> structural_attention(const BlockIndex& index, int depth_count) {
  std::vector<double> scores(index.count(), 0.0);
  for (const Block& b : index.blocks) {
    if (b.depth < 1 || b.depth > depth_count) {
      throw ConfigError("block depth outside 1..L");
    }
    const double depth_score =
        depth_count == 1
            ? 1.0
            : static_cast<double>(depth_count - b.depth) /
                  static_cast<double>(depth_count - 1);
    scores[static_cast<std::size_t>(b.block_id)] =
        0.5 * depth_score + 0.5 * (1.0 - b.density);
  }
  return scores;
}

ImportanceScore fuse_importance(std::span<const double> temporal,
                                std::span<const double> structural, double alpha) {
  if (temporal.size() != structural.size()) {
    throw ShapeError("temporal/structural score lengths differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must be in [0, 1]");
  }
  ImportanceScore out;
  out.alpha = alpha;
  out.score.resize(temporal.size());
  for (std::size_t i = 0; i < temporal.size(); ++i) {
    out.score[i] = alpha * temporal[i] + (1.0 - alpha) * structural[i];
  }
  return out;
}

std::size_t ceil_fraction(double frac, std::size_t n) {
  const double target = frac * static_cast<double>(n);
  double k = std::ceil(target - 1e-9);
  if (k < 0.0) k = 0.0;
  std::size_t out = static_cast<std::size_t>(k);
  return std::min(out, n);
}

SelectionResult top_p_select(const ImportanceScore& importance, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must be in [0, 1]");
  const std::size_t n = importance.score.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance.score[static_cast<std::size_t>(a)] >
           importance.score[static_cast<std::size_t>(b)];
  });
  const std::size_t k = ceil_fraction(p, n);
  SelectionResult result;
  result.p = p;
  result.block_ids.assign(order.begin(), order.begin() + static_cast<long>(k));
  std::sort(result.block_ids.begin(), result.block_ids.end());
  return result;
}

bool SelectionResult::contains(int id) const {
  return std::binary_search(block_ids.begin(), block_ids.end(), id);
}

TemporalAttentionParams calibrate_attention(const TemporalAttentionParams& params,
                                            const GradStats& stats) {
  const std::size_t n = stats.block_count();
  if (n == 0) return params;
  double mean_mag = 0.0;
  double mean_pre = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    mean_mag += stats.ema_mag(b);
    mean_pre += params.w1 * stats.ema_mag(b) + params.w2 * stats.variance(b);
  }
  mean_mag /= static_cast<double>(n);
  mean_pre /= static_cast<double>(n);
  if (mean_mag <= 0.0 || mean_pre == 0.0) return params;

  TemporalAttentionParams out = params;
  out.w1 -= kCalibrationStep * mean_pre / (mean_mag + kCalibrationEps);
  return out;
}

}  // namespace acesync
