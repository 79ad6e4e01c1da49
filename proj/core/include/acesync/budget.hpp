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
// Byte-budgeted block selection: a ratio-greedy 0/1 knapsack with the
// max-of-two guarantee for the per-round path, an exact DP oracle for tests,
// and the two-stage precision policy (full precision for the top-p set,
// quantized fill for the remainder).

#ifndef ACESYNC_BUDGET_HPP_
#define ACESYNC_BUDGET_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "acesync/compression.hpp"
#include "acesync/importance.hpp"

namespace acesync {

struct KnapsackItem {
  int block_id = 0;
  double value = 0.0;        // fused importance score
  std::uint64_t weight = 0;  // bytes this block would add to the message
};

struct ByteBudget {
  std::uint64_t bytes = 0;
};

// DP oracle limits; instances beyond these raise CapacityError.
inline constexpr std::size_t kMaxExactItems = 64;
inline constexpr std::uint64_t kMaxExactCapacity = 1'000'000;

// max(0, floor(B * 1e6 * window_s / 8) - overhead)
ByteBudget byte_budget(double bandwidth_mbps, double window_s,
                       std::uint64_t overhead_bytes);

// Ratio-greedy (value/weight desc, then value desc, then id asc) compared
// against the best single feasible item; returns the better of the two sets.
SelectionResult select_knapsack_greedy(std::span<const KnapsackItem> items,
                                       ByteBudget budget);

// Exact 0/1 knapsack by byte-granular DP. Ties broken by fewer items, then
// the lexicographically smallest id set.
SelectionResult select_knapsack_exact(std::span<const KnapsackItem> items,
                                      ByteBudget budget);

double selection_value(std::span<const KnapsackItem> items,
                       const SelectionResult& selection);
std::uint64_t selection_weight(std::span<const KnapsackItem> items,
                               const SelectionResult& selection);

struct BlockPlan {
  int block_id = 0;
  bool full_precision = false;
  int bits = 0;                // quantization width when !full_precision
  std::uint64_t bytes = 0;     // block header + payload
};

struct TransmissionPlan {
  std::vector<BlockPlan> blocks;               // ascending block id
  std::uint64_t total_bytes = kMessageHeaderBytes;

  SelectionResult selection() const;
  SelectionResult full_precision_ids() const;
};

// Marks the selected blocks that fall in the top-p importance set as
// full-precision and the rest as quantized at ratio_to_bits(c).
TransmissionPlan assign_precision(const SelectionResult& selection,
                                  const ImportanceScore& importance, double p,
                                  double c, const CompressionSchedule& sched,
                                  const BlockIndex& index);

// Two-stage per-round policy. The top-p set is sent full precision; leftover
// budget is filled with quantized blocks picked by the greedy knapsack. If the
// top-p set alone exceeds the budget, the knapsack runs over the top-p items
// at full precision and everything else is deferred. force_all bypasses the
// budget and includes every block (top-p full precision, rest quantized).
TransmissionPlan select_under_budget(const ImportanceScore& importance, double p,
                                     double c, const CompressionSchedule& sched,
                                     const BlockIndex& index, ByteBudget budget,
                                     bool force_all);

}  // namespace acesync

#endif  // ACESYNC_BUDGET_HPP_
