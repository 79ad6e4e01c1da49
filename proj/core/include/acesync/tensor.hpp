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
// Minimal dense numerics: a flat-parameter MLP with exact gradients, synthetic
// classification data, and block partitioning of the parameter vector.

#ifndef ACESYNC_TENSOR_HPP_
#define ACESYNC_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acesync/errors.hpp"

namespace acesync {

// One contiguous segment of the flat parameter vector (a weight matrix or a
// bias vector). cols == 0 marks a plain vector of `rows` entries.
struct LayerMeta {
  std::string name;
  int depth = 1;  // 1-based layer depth
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct ModelParams {
  std::vector<double> values;
  std::vector<LayerMeta> layout;

  std::size_t size() const { return values.size(); }
  int depth_count() const;
  // Throws ShapeError/NumericError if segments do not tile the vector, depths
  // have gaps, or any value is non-finite.
  void validate() const;
};

struct GradientVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct DataSpec {
  std::size_t samples = 10000;   // M
  std::size_t features = 20;     // D
  std::size_t classes = 5;       // C
  double class_sep = 3.0;        // radius of the sphere class means sit on
  double noise_sigma = 1.0;
};

struct Dataset {
  std::vector<double> features;  // row-major samples x dim
  std::vector<int> labels;
  std::size_t samples = 0;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
};

// Non-owning batch view over row-major features plus labels.
struct Batch {
  const double* features = nullptr;
  const int* labels = nullptr;
  std::size_t count = 0;
  std::size_t dim = 0;
};

struct Block {
  int block_id = 0;
  std::size_t offset = 0;
  std::size_t len = 0;
  int depth = 1;
  double density = 0.0;  // len / total parameter count
};

struct BlockIndex {
  std::size_t block_size = 0;
  std::size_t total_len = 0;
  std::vector<Block> blocks;

  std::size_t count() const { return blocks.size(); }
};

struct LossResult {
  double loss = 0.0;
  std::size_t correct = 0;
};

struct BackwardResult {
  GradientVector grad;
  double loss = 0.0;
  std::size_t correct = 0;
};

// C Gaussian clusters with means on the radius-class_sep sphere, labels
// assigned round-robin (balanced within one sample). Deterministic per seed.
Dataset make_synthetic_dataset(const DataSpec& spec, std::uint64_t seed);

Batch full_batch(const Dataset& data);

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights, zero biases.
// Layout alternates weight/bias segments with depths 1..L.
ModelParams init_model(std::span<const std::size_t> arch, std::uint64_t seed);

// Mean cross-entropy with tanh hidden activations and softmax output.
LossResult forward_loss(const ModelParams& params, const Batch& batch);

// Exact analytic gradient of forward_loss.
GradientVector backward(const ModelParams& params, const Batch& batch);

// Single forward+backward pass; avoids recomputing activations when both the
// loss and the gradient are needed.
BackwardResult backward_with_loss(const ModelParams& params, const Batch& batch);

// values_i <- values_i - lr * update_i
void apply_update(ModelParams& params, const GradientVector& update, double lr);

// Tiles the parameter vector with blocks of block_size, cut at segment
// boundaries so a block never spans two layout entries.
BlockIndex partition_blocks(const ModelParams& params, std::size_t block_size);

}  // namespace acesync

#endif  // ACESYNC_TENSOR_HPP_
