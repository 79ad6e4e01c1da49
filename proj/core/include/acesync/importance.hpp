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
// Per-block importance scoring: temporal attention over gradient-magnitude
// history, structural attention over layer depth/density, score fusion, and
// top-p selection.

#ifndef ACESYNC_IMPORTANCE_HPP_
#define ACESYNC_IMPORTANCE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "acesync/tensor.hpp"

namespace acesync {

struct GradStatsConfig {
  double rho = 0.9;          // EMA decay
  std::size_t window = 16;   // ring-buffer length T
};

// Per-block gradient statistics: EMA of the block-mean |g| plus a ring buffer
// of the last T block means for variance estimation.
class GradStats {
 public:
  GradStats(std::size_t n_blocks, GradStatsConfig cfg);

  std::size_t block_count() const { return n_blocks_; }
  const GradStatsConfig& config() const { return cfg_; }

  double ema_mag(std::size_t block) const { return ema_[block]; }
  // Population variance over the current window; 0 for fewer than 2 entries.
  double variance(std::size_t block) const;
  std::size_t window_count(std::size_t block) const;
  std::uint64_t rounds_seen(std::size_t block) const { return rounds_seen_[block]; }

  // Appends the block-mean |g| of every block; the EMA takes the raw mean on
  // the first observation and rho-decayed updates afterwards.
  void update(const GradientVector& grad, const BlockIndex& index);

 private:
  GradStatsConfig cfg_;
  std::size_t n_blocks_;
  std::vector<double> ema_;
  std::vector<double> ring_;            // n_blocks x window, circular
  std::vector<std::uint64_t> rounds_seen_;
};

struct TemporalAttentionParams {
  double w1 = 4.0;
  double w2 = 1.0;
};

struct ImportanceScore {
  std::vector<double> score;  // per block, in [0, 1]
  double alpha = 0.0;         // fusion coefficient used to produce it
};

struct SelectionResult {
  std::vector<int> block_ids;    // ascending
  std::optional<double> p;       // set when produced by top-p selection

  bool contains(int id) const;
};

void update_grad_stats(GradStats& stats, const GradientVector& grad,
                       const BlockIndex& index);

// logistic(w1 * ema_mag + w2 * var) per block; scores in (0, 1).
std::vector<double> temporal_attention(const GradStats& stats,
                                       const TemporalAttentionParams& params);

// 0.5 * depth_score + 0.5 * (1 - density); earlier layers score higher,
// depth_score = 1 when the model has a single depth level.
std::vector<double> structural_attention(const BlockIndex& index, int depth_count);

ImportanceScore fuse_importance(std::span<const double> temporal,
                                std::span<const double> structural, double alpha);

// Picks the ceil(p * n_blocks) highest-scoring blocks; ties go to the lower
// block id.
SelectionResult top_p_select(const ImportanceScore& importance, double p);

// Recenters the mean pre-activation toward zero by a damped step on w1; no-op
// when the mean pre-activation is already zero or all magnitudes vanish.
TemporalAttentionParams calibrate_attention(const TemporalAttentionParams& params,
                                            const GradStats& stats);

// Robust ceil(frac * n) for frac in [0, 1]; guards against the product
// landing one ulp above an integer.
std::size_t ceil_fraction(double frac, std::size_t n);

}  // namespace acesync

#endif  // ACESYNC_IMPORTANCE_HPP_
