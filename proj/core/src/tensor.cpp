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

#include "acesync/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "acesync/rng.hpp"

namespace acesync {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Activations for one forward pass; a[0] is the input batch.
struct ForwardPass {
  std::vector<std::vector<double>> a;      // activations per layer, N x width
  std::vector<double> probs;               // softmax outputs, N x classes
  double loss = 0.0;
  std::size_t correct = 0;
};

// Widths implied by the layout: [in, h1, ..., out]. Layout alternates
// weight (rows x cols) and bias (cols) segments.
std::vector<std::size_t> layer_widths(const ModelParams& params) {
  const auto& layout = params.layout;
  if (layout.empty() || layout.size() % 2 != 0) {
    throw ShapeError("model layout must alternate weight/bias segments");
  }
  std::vector<std::size_t> widths;
  widths.push_back(layout[0].rows);
  for (std::size_t i = 0; i < layout.size(); i += 2) {
    const LayerMeta& w = layout[i];
    const LayerMeta& b = layout[i + 1];
    if (w.cols == 0 || b.cols != 0 || b.rows != w.cols) {
      throw ShapeError("model layout must alternate weight/bias segments");
    }
    if (w.rows != widths.back()) {
      throw ShapeError("weight fan-in does not match previous layer width");
    }
    widths.push_back(w.cols);
  }
  return widths;
}

ForwardPass run_forward(const ModelParams& params, const Batch& batch) {
  if (batch.count == 0) throw ShapeError("empty batch");
  std::vector<std::size_t> widths = layer_widths(params);
  if (batch.dim != widths.front()) {
    throw ShapeError("batch feature dim does not match model input width");
  }
  const std::size_t n = batch.count;
  const std::size_t num_layers = widths.size() - 1;
  const std::size_t classes = widths.back();

  ForwardPass fp;
  fp.a.resize(num_layers + 1);
  fp.a[0].assign(batch.features, batch.features + n * batch.dim);

  for (std::size_t l = 0; l < num_layers; ++l) {
    const LayerMeta& wm = params.layout[2 * l];
    const LayerMeta& bm = params.layout[2 * l + 1];
    const double* w = params.values.data() + wm.offset;
    const double* b = params.values.data() + bm.offset;
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const std::vector<double>& src = fp.a[l];
    std::vector<double>& dst = fp.a[l + 1];
    dst.assign(n * out, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* zrow = dst.data() + i * out;
      for (std::size_t j = 0; j < out; ++j) zrow[j] = b[j];
      const double* xrow = src.data() + i * in;
      for (std::size_t k = 0; k < in; ++k) {
        const double x = xrow[k];
        const double* wrow = w + k * out;
        for (std::size_t j = 0; j < out; ++j) zrow[j] += x * wrow[j];
      }
      if (l + 1 < num_layers) {
        for (std::size_t j = 0; j < out; ++j) zrow[j] = std::tanh(zrow[j]);
      }
    }
  }

  // Softmax + mean cross-entropy over the logits in fp.a.back().
  const std::vector<double>& logits = fp.a.back();
  fp.probs.assign(n * classes, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = logits.data() + i * classes;
    const int label = batch.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ShapeError("label outside [0, classes)");
    }
    double zmax = z[0];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < classes; ++j) {
      if (z[j] > zmax) {
        zmax = z[j];
        arg = j;
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum += std::exp(z[j] - zmax);
    const double lse = std::log(sum);
    total += lse - (z[label] - zmax);
    double* p = fp.probs.data() + i * classes;
    for (std::size_t j = 0; j < classes; ++j) {
      p[j] = std::exp(z[j] - zmax) / sum;
    }
    if (arg == static_cast<std::size_t>(label)) ++fp.correct;
  }
  fp.loss = total / static_cast<double>(n);
  if (!std::isfinite(fp.loss)) throw NumericError("non-finite loss");
  return fp;
}

GradientVector run_backward(const ModelParams& params, const Batch& batch,
                            const ForwardPass& fp) {
  const std::vector<std::size_t> widths = layer_widths(params);
  const std::size_t n = batch.count;
  const std::size_t num_layers = widths.size() - 1;
  const std::size_t classes = widths.back();

  GradientVector grad;
  grad.values.assign(params.size(), 0.0);

  // dz at the output: (softmax - onehot) / N.
  std::vector<double> dz(fp.probs);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = dz.data() + i * classes;
    row[batch.labels[i]] -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) row[j] *= inv_n;
  }

  for (std::size_t l = num_layers; l-- > 0;) {
    const LayerMeta& wm = params.layout[2 * l];
    const LayerMeta& bm = params.layout[2 * l + 1];
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    const std::vector<double>& a_prev = fp.a[l];
    double* dw = grad.values.data() + wm.offset;
    double* db = grad.values.data() + bm.offset;

    for (std::size_t i = 0; i < n; ++i) {
      const double* dzrow = dz.data() + i * out;
      const double* arow = a_prev.data() + i * in;
      for (std::size_t j = 0; j < out; ++j) db[j] += dzrow[j];
      for (std::size_t k = 0; k < in; ++k) {
        const double x = arow[k];
        double* dwrow = dw + k * out;
        for (std::size_t j = 0; j < out; ++j) dwrow[j] += x * dzrow[j];
      }
    }

    if (l == 0) break;

    // da_prev = dz . W^T, then through tanh: dz_prev = da_prev * (1 - a^2).
    const double* w = params.values.data() + wm.offset;
    std::vector<double> dz_prev(n * in, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dzrow = dz.data() + i * out;
      const double* arow = a_prev.data() + i * in;
      double* drow = dz_prev.data() + i * in;
      for (std::size_t k = 0; k < in; ++k) {
        double acc = 0.0;
        const double* wrow = w + k * out;
        for (std::size_t j = 0; j < out; ++j) acc += dzrow[j] * wrow[j];
        drow[k] = acc * (1.0 - arow[k] * arow[k]);
      }
    }
    dz.swap(dz_prev);
  }
  return grad;
}

}  // namespace

int ModelParams::depth_count() const {
  int max_depth = 0;
  for (const LayerMeta& m : layout) max_depth = std::max(max_depth, m.depth);
  return max_depth;
}

void ModelParams::validate() const {
  std::size_t expect = 0;
  int prev_depth = 0;
  for (const LayerMeta& m : layout) {
    if (m.offset != expect) throw ShapeError("layout segments are not contiguous");
    std::size_t len = m.cols == 0 ? m.rows : m.rows * m.cols;
    if (len != m.length || m.length == 0) {
      throw ShapeError("layout segment length does not match its shape");
    }
    if (m.depth < 1 || m.depth < prev_depth || m.depth > prev_depth + 1) {
      throw ShapeError("layout depths must cover 1..L without gaps");
    }
    prev_depth = m.depth;
    expect += m.length;
  }
  if (expect != values.size()) {
    throw ShapeError("layout does not cover the parameter vector exactly");
  }
  if (!all_finite(values)) throw NumericError("non-finite parameter value");
}

Dataset make_synthetic_dataset(const DataSpec& spec, std::uint64_t seed) {
  if (spec.classes < 2 || spec.samples < spec.classes || spec.features < 1) {
    throw ConfigError("dataset spec requires M >= C >= 2 and D >= 1");
  }
  if (spec.noise_sigma < 0.0 || spec.class_sep < 0.0) {
    throw ConfigError("dataset spec requires noise_sigma >= 0 and class_sep >= 0");
  }
  Rng rng(seed);
  const std::size_t d = spec.features;
  const std::size_t c = spec.classes;

  // Class means: sep * (unit direction from a normalized Gaussian draw).
  std::vector<double> means(c * d, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    double* mu = means.data() + k * d;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      mu[j] = rng.normal();
      norm2 += mu[j] * mu[j];
    }
    double norm = std::sqrt(norm2);
    if (norm < 1e-12) {
      std::fill(mu, mu + d, 0.0);
      mu[0] = 1.0;
      norm = 1.0;
    }
    for (std::size_t j = 0; j < d; ++j) mu[j] = mu[j] / norm * spec.class_sep;
  }

  Dataset data;
  data.samples = spec.samples;
  data.dim = d;
  data.num_classes = c;
  data.seed = seed;
  data.features.resize(spec.samples * d);
  data.labels.resize(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const int label = static_cast<int>(i % c);
    data.labels[i] = label;
    const double* mu = means.data() + static_cast<std::size_t>(label) * d;
    double* row = data.features.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = mu[j] + spec.noise_sigma * rng.normal();
    }
  }
  return data;
}

Batch full_batch(const Dataset& data) {
  return Batch{data.features.data(), data.labels.data(), data.samples, data.dim};
}

ModelParams init_model(std::span<const std::size_t> arch, std::uint64_t seed) {
  if (arch.size() < 2) throw ConfigError("arch needs at least two layer widths");
  for (std::size_t w : arch) {
    if (w == 0) throw ConfigError("arch widths must be >= 1");
  }
  Rng rng(seed);
  ModelParams params;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    const std::size_t in = arch[l];
    const std::size_t out = arch[l + 1];
    const int depth = static_cast<int>(l + 1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));

    LayerMeta wm;
    wm.name = "W" + std::to_string(depth);
    wm.depth = depth;
    wm.offset = offset;
    wm.length = in * out;
    wm.rows = in;
    wm.cols = out;
    params.layout.push_back(wm);
    for (std::size_t i = 0; i < in * out; ++i) {
      params.values.push_back(rng.uniform(-scale, scale));
    }
    offset += in * out;

    LayerMeta bm;
    bm.name = "b" + std::to_string(depth);
    bm.depth = depth;
    bm.offset = offset;
    bm.length = out;
    bm.rows = out;
    bm.cols = 0;
    params.layout.push_back(bm);
    params.values.insert(params.values.end(), out, 0.0);
    offset += out;
  }
  return params;
}

LossResult forward_loss(const ModelParams& params, const Batch& batch) {
  ForwardPass fp = run_forward(params, batch);
  return LossResult{fp.loss, fp.correct};
}

GradientVector backward(const ModelParams& params, const Batch& batch) {
  ForwardPass fp = run_forward(params, batch);
  return run_backward(params, batch, fp);
}

BackwardResult backward_with_loss(const ModelParams& params, const Batch& batch) {
  ForwardPass fp = run_forward(params, batch);
  BackwardResult out;
  out.grad = run_backward(params, batch, fp);
  out.loss = fp.loss;
  out.correct = fp.correct;
  return out;
}

void apply_update(ModelParams& params, const GradientVector& update, double lr) {
  if (params.size() != update.size()) {
    throw ShapeError("update length does not match parameter count");
  }
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    params.values[i] -= lr * update.values[i];
  }
}

BlockIndex partition_blocks(const ModelParams& params, std::size_t block_size) {
  if (block_size == 0) throw ConfigError("block_size must be >= 1");
  BlockIndex index;
  index.block_size = block_size;
  index.total_len = params.size();
  const double n = static_cast<double>(params.size());
  int next_id = 0;
  for (const LayerMeta& m : params.layout) {
    for (std::size_t off = 0; off < m.length; off += block_size) {
      Block b;
      b.block_id = next_id++;
      b.offset = m.offset + off;
      b.len = std::min(block_size, m.length - off);
      b.depth = m.depth;
      b.density = static_cast<double>(b.len) / n;
      index.blocks.push_back(b);
    }
  }
  return index;
}

}  // namespace acesync
