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

#include "acesync/budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace acesync {

namespace {

void check_items(std::span<const KnapsackItem> items) {
  for (const KnapsackItem& it : items) {
    if (it.weight == 0) throw ConfigError("knapsack item weights must be > 0");
    if (!(it.value >= 0.0)) throw ConfigError("knapsack item values must be >= 0");
  }
}

SelectionResult ids_to_selection(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  SelectionResult out;
  out.block_ids = std::move(ids);
  return out;
}

// True when mask `a` is the lexicographically smaller id set: the smallest
// item index in the symmetric difference belongs to `a`.
bool lex_smaller(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t diff = a ^ b;
  if (diff == 0) return false;
  const std::uint64_t lowest = diff & (~diff + 1);
  return (a & lowest) != 0;
}

}  // namespace

ByteBudget byte_budget(double bandwidth_mbps, double window_s,
                       std::uint64_t overhead_bytes) {
  if (bandwidth_mbps < 0.0) throw ConfigError("bandwidth must be >= 0");
  if (!(window_s > 0.0)) throw ConfigError("budget window must be > 0");
  const double raw = std::floor(bandwidth_mbps * 1e6 * window_s / 8.0);
  const std::uint64_t bytes = raw <= 0.0 ? 0 : static_cast<std::uint64_t>(raw);
  return ByteBudget{bytes > overhead_bytes ? bytes - overhead_bytes : 0};
}

SelectionResult select_knapsack_greedy(std::span<const KnapsackItem> items,
                                       ByteBudget budget) {
  check_items(items);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    // value/weight descending via cross-multiplication, then value, then id.
    const double lhs = items[a].value * static_cast<double>(items[b].weight);
    const double rhs = items[b].value * static_cast<double>(items[a].weight);
    if (lhs != rhs) return lhs > rhs;
    if (items[a].value != items[b].value) return items[a].value > items[b].value;
    return items[a].block_id < items[b].block_id;
  });

  std::vector<int> picked;
  double picked_value = 0.0;
  std::uint64_t remaining = budget.bytes;
  for (std::size_t i : order) {
    if (items[i].weight <= remaining) {
      picked.push_back(items[i].block_id);
      picked_value += items[i].value;
      remaining -= items[i].weight;
    }
  }

  // Max-of-two rule: fall back to the single best feasible item when it beats
  // the greedy set.
  double best_single_value = -1.0;
  int best_single_id = -1;
  for (const KnapsackItem& it : items) {
    if (it.weight <= budget.bytes &&
        (it.value > best_single_value ||
         (it.value == best_single_value && it.block_id < best_single_id))) {
      best_single_value = it.value;
      best_single_id = it.block_id;
    }
  }
  if (best_single_id >= 0 && best_single_value > picked_value) {
    return ids_to_selection({best_single_id});
  }
  return ids_to_selection(std::move(picked));
}

SelectionResult select_knapsack_exact(std::span<const KnapsackItem> items,
                                      ByteBudget budget) {
  check_items(items);
  if (items.empty() || budget.bytes == 0) return SelectionResult{};

  std::uint64_t total_weight = 0;
  for (const KnapsackItem& it : items) total_weight += it.weight;
  if (total_weight <= budget.bytes) {
    std::vector<int> all;
    all.reserve(items.size());
    for (const KnapsackItem& it : items) all.push_back(it.block_id);
    return ids_to_selection(std::move(all));
  }

  if (items.size() > kMaxExactItems) {
    throw CapacityError("exact knapsack limited to 64 items");
  }
  const std::uint64_t cap = budget.bytes;
  if (cap > kMaxExactCapacity) {
    throw CapacityError("exact knapsack capacity limit exceeded");
  }

  // Items in ascending id order so masks map to id-sorted sets.
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].block_id < items[b].block_id;
  });

  struct Cell {
    double value = 0.0;
    std::uint32_t count = 0;
    std::uint64_t mask = 0;
  };
  std::vector<Cell> dp(static_cast<std::size_t>(cap) + 1);

  auto better = [](const Cell& cand, const Cell& cur) {
    if (cand.value != cur.value) return cand.value > cur.value;
    if (cand.count != cur.count) return cand.count < cur.count;
    return lex_smaller(cand.mask, cur.mask);
  };

  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const KnapsackItem& it = items[order[pos]];
    if (it.weight > cap) continue;
    for (std::uint64_t w = cap; w >= it.weight; --w) {
      const Cell& base = dp[static_cast<std::size_t>(w - it.weight)];
      Cell cand{base.value + it.value, base.count + 1,
                base.mask | (std::uint64_t{1} << pos)};
      Cell& cur = dp[static_cast<std::size_t>(w)];
      if (better(cand, cur)) cur = cand;
    }
  }

  const Cell& best = dp[static_cast<std::size_t>(cap)];
  std::vector<int> ids;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (best.mask & (std::uint64_t{1} << pos)) {
      ids.push_back(items[order[pos]].block_id);
    }
  }
  return ids_to_selection(std::move(ids));
}

double selection_value(std::span<const KnapsackItem> items,
                       const SelectionResult& selection) {
  double total = 0.0;
  for (const KnapsackItem& it : items) {
    if (selection.contains(it.block_id)) total += it.value;
  }
  return total;
}

std::uint64_t selection_weight(std::span<const KnapsackItem> items,
                               const SelectionResult& selection) {
  std::uint64_t total = 0;
  for (const KnapsackItem& it : items) {
    if (selection.contains(it.block_id)) total += it.weight;
  }
  return total;
}

SelectionResult TransmissionPlan::selection() const {
  SelectionResult out;
  out.block_ids.reserve(blocks.size());
  for (const BlockPlan& bp : blocks) out.block_ids.push_back(bp.block_id);
  return out;
}

SelectionResult TransmissionPlan::full_precision_ids() const {
  SelectionResult out;
  for (const BlockPlan& bp : blocks) {
    if (bp.full_precision) out.block_ids.push_back(bp.block_id);
  }
  return out;
}

TransmissionPlan assign_precision(const SelectionResult& selection,
                                  const ImportanceScore& importance, double p,
                                  double c, const CompressionSchedule& sched,
                                  const BlockIndex& index) {
  sched.validate();
  const SelectionResult top = top_p_select(importance, p);
  const int bits = ratio_to_bits(c, sched);
  TransmissionPlan plan;
  for (int id : selection.block_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= index.count()) {
      throw ProtocolError("selection references an unknown block id");
    }
    const Block& b = index.blocks[static_cast<std::size_t>(id)];
    BlockPlan bp;
    bp.block_id = id;
    bp.full_precision = top.contains(id);
    bp.bits = bp.full_precision ? 0 : bits;
    bp.bytes = kBlockHeaderBytes + (bp.full_precision
                                        ? full_precision_payload_bytes(b.len)
                                        : quantized_payload_bytes(b.len, bits));
    plan.blocks.push_back(bp);
  }
  std::sort(plan.blocks.begin(), plan.blocks.end(),
            [](const BlockPlan& a, const BlockPlan& b) { return a.block_id < b.block_id; });
  plan.total_bytes = kMessageHeaderBytes;
  for (const BlockPlan& bp : plan.blocks) plan.total_bytes += bp.bytes;
  return plan;
}

TransmissionPlan select_under_budget(const ImportanceScore& importance, double p,
                                     double c, const CompressionSchedule& sched,
                                     const BlockIndex& index, ByteBudget budget,
                                     bool force_all) {
  sched.validate();
  if (importance.score.size() != index.count()) {
    throw ShapeError("importance length does not match block count");
  }
  const SelectionResult top = top_p_select(importance, p);
  const int bits = ratio_to_bits(c, sched);

  SelectionResult chosen;
  if (force_all) {
    chosen.block_ids.resize(index.count());
    std::iota(chosen.block_ids.begin(), chosen.block_ids.end(), 0);
    return assign_precision(chosen, importance, p, c, sched, index);
  }

  std::uint64_t top_bytes = 0;
  for (int id : top.block_ids) {
    top_bytes += kBlockHeaderBytes +
                 full_precision_payload_bytes(index.blocks[static_cast<std::size_t>(id)].len);
  }

  if (top_bytes > budget.bytes) {
    // The must-send set itself does not fit; prioritize within it.
    std::vector<KnapsackItem> items;
    items.reserve(top.block_ids.size());
    for (int id : top.block_ids) {
      const Block& b = index.blocks[static_cast<std::size_t>(id)];
      items.push_back({id, importance.score[static_cast<std::size_t>(id)],
                       kBlockHeaderBytes + full_precision_payload_bytes(b.len)});
    }
    chosen = select_knapsack_greedy(items, budget);
  } else {
    chosen = top;
    std::vector<KnapsackItem> items;
    for (const Block& b : index.blocks) {
      if (top.contains(b.block_id)) continue;
      items.push_back({b.block_id, importance.score[static_cast<std::size_t>(b.block_id)],
                       kBlockHeaderBytes + quantized_payload_bytes(b.len, bits)});
    }
    const SelectionResult fill =
        select_knapsack_greedy(items, ByteBudget{budget.bytes - top_bytes});
    chosen.block_ids.insert(chosen.block_ids.end(), fill.block_ids.begin(),
                            fill.block_ids.end());
    std::sort(chosen.block_ids.begin(), chosen.block_ids.end());
  }
  return assign_precision(chosen, importance, p, c, sched, index);
}

}  // namespace acesync
