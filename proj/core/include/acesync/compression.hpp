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
// Bandwidth-adaptive compression scheduling, sign/norm/level block
// quantization, momentum error feedback, and exact payload byte accounting.
//
// Wire framing (fixed; netsim and the metrics log account these bytes):
//   message header   16 B  per device per round
//   block header      8 B  (4 B block id + 4 B flags/bits)
//   full-precision    4 B per element
//   quantized         4 B scale + ceil(len * (bits + 1) / 8) B packed
//                     sign+level words (1 sign bit + `bits` level bits each)

#ifndef ACESYNC_COMPRESSION_HPP_
#define ACESYNC_COMPRESSION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "acesync/importance.hpp"
#include "acesync/tensor.hpp"

namespace acesync {

inline constexpr std::uint64_t kMessageHeaderBytes = 16;
inline constexpr std::uint64_t kBlockHeaderBytes = 8;

struct CompressionSchedule {
  double c_min = 0.05;
  double c_max = 0.9;
  double beta = 0.005;  // bandwidth sensitivity, per Mbps
  int b_min = 2;
  int b_max = 16;

  void validate() const;
};

struct QuantizedBlock {
  int block_id = 0;
  int bits = 0;
  double scale = 0.0;                 // l2 norm of the source block
  std::vector<std::uint8_t> signs;    // 1 = negative
  std::vector<std::uint16_t> levels;  // in [0, 2^bits - 1]
};

struct ErrorFeedbackState {
  std::vector<double> residual;
  double gamma = 0.9;

  explicit ErrorFeedbackState(std::size_t n = 0, double g = 0.9)
      : residual(n, 0.0), gamma(g) {}
};

// c = c_min + (c_max - c_min) * exp(-beta * B); decreasing in bandwidth.
double schedule_ratio(double bandwidth_mbps, const CompressionSchedule& sched);

// Maps compression aggressiveness to a quantization bit-width:
// clamp(round((1 - c) * b_max), b_min, b_max).
int ratio_to_bits(double c, const CompressionSchedule& sched);

QuantizedBlock quantize_block(std::span<const double> block, int bits,
                              int block_id = 0);

std::vector<double> dequantize_block(const QuantizedBlock& qb);

// corrected_i = g_i + gamma * e_i
GradientVector apply_error_feedback(const GradientVector& grad,
                                    const ErrorFeedbackState& ef);

// e_i <- corrected_i - sent_i
void accumulate_residual(ErrorFeedbackState& ef, const GradientVector& corrected,
                         const GradientVector& sent);

std::uint64_t full_precision_payload_bytes(std::size_t len);
std::uint64_t quantized_payload_bytes(std::size_t len, int bits);

// Total message bytes for `selection` given per-block bit-widths and the set
// of blocks sent at full precision. Includes the 16-byte message header.
std::uint64_t payload_size(const SelectionResult& selection, const BlockIndex& index,
                           std::span<const int> bits_per_block,
                           const SelectionResult& full_precision_ids);

}  // namespace acesync

#endif  // ACESYNC_COMPRESSION_HPP_
