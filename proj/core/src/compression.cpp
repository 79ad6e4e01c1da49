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

#include <algorithm>
#include <cmath>

namespace acesync {

void CompressionSchedule::validate() const {
  if (!(c_min > 0.0 && c_min <= c_max && c_max <= 1.0)) {
    throw ConfigError("schedule requires 0 < c_min <= c_max <= 1");
  }
  if (beta < 0.0) throw ConfigError("schedule beta must be >= 0");
  if (!(b_min >= 2 && b_min <= b_max && b_max <= 16)) {
    throw ConfigError("schedule requires 2 <= b_min <= b_max <= 16");
  }
}

double schedule_ratio(double bandwidth_mbps, const CompressionSchedule& sched) {
  sched.validate();
  if (bandwidth_mbps < 0.0) throw ConfigError("bandwidth must be >= 0");
  const double c =
      sched.c_min + (sched.c_max - sched.c_min) * std::exp(-sched.beta * bandwidth_mbps);
  return std::clamp(c, sched.c_min, sched.c_max);
}

int ratio_to_bits(double c, const CompressionSchedule& sched) {
  const int b = static_cast<int>(std::lround((1.0 - c) * sched.b_max));
  return std::clamp(b, sched.b_min, sched.b_max);
}

QuantizedBlock quantize_block(std::span<const double> block, int bits, int block_id) {
  if (bits < 2 || bits > 16) throw ConfigError("bits must be in [2, 16]");
  if (block.empty()) throw ShapeError("cannot quantize an empty block");
  double norm2 = 0.0;
  for (double x : block) {
    if (!std::isfinite(x)) throw NumericError("non-finite value in block");
    norm2 += x * x;
  }
  QuantizedBlock qb;
  qb.block_id = block_id;
  qb.bits = bits;
  qb.scale = std::sqrt(norm2);
  qb.signs.resize(block.size());
  qb.levels.resize(block.size());
  if (qb.scale == 0.0) {
    std::fill(qb.signs.begin(), qb.signs.end(), std::uint8_t{0});
    std::fill(qb.levels.begin(), qb.levels.end(), std::uint16_t{0});
    return qb;
  }
  const double steps = static_cast<double>((1u << bits) - 1);
  for (std::size_t i = 0; i < block.size(); ++i) {
    qb.signs[i] = block[i] < 0.0 ? 1 : 0;
    // |g_i| <= scale, so the level always fits in `bits`.
    qb.levels[i] =
        static_cast<std::uint16_t>(std::llround(std::abs(block[i]) / qb.scale * steps));
  }
  return qb;
}

std::vector<double> dequantize_block(const QuantizedBlock& qb) {
  std::vector<double> out(qb.levels.size(), 0.0);
  if (qb.scale == 0.0) return out;
  const double steps = static_cast<double>((1u << qb.bits) - 1);
  for (std::size_t i = 0; i < qb.levels.size(); ++i) {
    const double mag = qb.scale * static_cast<double>(qb.levels[i]) / steps;
    out[i] = qb.signs[i] ? -mag : mag;
  }
  return out;
}

GradientVector apply_error_feedback(const GradientVector& grad,
                                    const ErrorFeedbackState& ef) {
  if (grad.size() != ef.residual.size()) {
    throw ShapeError("residual length does not match gradient length");
  }
  GradientVector out;
  out.values.resize(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    out.values[i] = grad.values[i] + ef.gamma * ef.residual[i];
  }
  return out;
}

void accumulate_residual(ErrorFeedbackState& ef, const GradientVector& corrected,
                         const GradientVector& sent) {
  if (corrected.size() != sent.size() || corrected.size() != ef.residual.size()) {
    throw ShapeError("corrected/sent/residual lengths differ");
  }
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    ef.residual[i] = corrected.values[i] - sent.values[i];
  }
}

std::uint64_t full_precision_payload_bytes(std::size_t len) {
  return 4 * static_cast<std::uint64_t>(len);
}

std::uint64_t quantized_payload_bytes(std::size_t len, int bits) {
  const std::uint64_t packed_bits =
      static_cast<std::uint64_t>(len) * static_cast<std::uint64_t>(bits + 1);
  return 4 + (packed_bits + 7) / 8;
}

std::uint64_t payload_size(const SelectionResult& selection, const BlockIndex& index,
                           std::span<const int> bits_per_block,
                           const SelectionResult& full_precision_ids) {
  std::uint64_t bytes = kMessageHeaderBytes;
  for (int id : selection.block_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= index.count()) {
      throw ProtocolError("selection references an unknown block id");
    }
    const Block& b = index.blocks[static_cast<std::size_t>(id)];
    bytes += kBlockHeaderBytes;
    if (full_precision_ids.contains(id)) {
      bytes += full_precision_payload_bytes(b.len);
    } else {
      bytes += quantized_payload_bytes(b.len, bits_per_block[static_cast<std::size_t>(id)]);
    }
  }
  return bytes;
}

}  // namespace acesync
