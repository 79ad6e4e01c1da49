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

#include "acesync/runner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "acesync/budget.hpp"
#include "acesync/coordinator.hpp"
#include "acesync/netsim.hpp"
#include "acesync/rng.hpp"

namespace acesync {

namespace {

// Seed sub-stream tags.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kTraceStream = 3;
constexpr std::uint64_t kProfileStream = 4;
constexpr std::uint64_t kClusterStream = 5;
constexpr std::uint64_t kShuffleStream = 6;

struct DeviceRuntime {
  DeviceRuntime(std::size_t n_params, std::size_t n_blocks, GradStatsConfig stats_cfg,
                double gamma, double lambda)
      : stats(n_blocks, stats_cfg),
        ef(n_params, gamma),
        sent_mirror(1, n_blocks, lambda) {}

  DeviceProfile profile;
  std::vector<std::size_t> shard;  // dataset sample indices
  std::size_t batches_per_epoch = 1;
  std::vector<std::size_t> order;  // shuffled shard view
  std::size_t batch_cursor = 0;
  std::size_t epoch_index = 0;
  ModelParams model;
  GradStats stats;
  ErrorFeedbackState ef;
  GradientCache sent_mirror;  // device-side copy of what the cloud cached
  int cluster = 0;
};

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};

class ExperimentRun {
 public:
  ExperimentRun(const ExperimentConfig& cfg, const AuditHook& audit)
      : cfg_(cfg), audit_(audit) {}

  RunOutput run();

 private:
  void setup();
  void next_batch(std::size_t k, std::vector<double>& feat, std::vector<int>& labels);
  void local_training(std::size_t k, GradientVector& grad_sum, double& loss_sum,
                      std::size_t& batch_count);
  void global_step(const GradientVector& g);
  void record_round(std::uint64_t round, std::uint64_t uplink, std::uint64_t downlink,
                    double train_loss, double mean_c);

  const ExperimentConfig& cfg_;
  const AuditHook& audit_;

  Dataset dataset_;
  std::size_t train_count_ = 0;
  Batch val_batch_;
  ModelParams global_;
  BlockIndex index_;
  std::vector<DeviceRuntime> devices_;
  ClusterAssignment clusters_;
  std::vector<double> structural_;  // fixed per run
  DeviceWeight weights_;
  std::unique_ptr<NetSim> sim_;
  std::unique_ptr<GradientCache> cache_;
  GradStats cloud_stats_{1, GradStatsConfig{}};
  TemporalAttentionParams attn_params_;
  DivergenceReport report_;
  bool tau_ready_ = false;
  std::vector<double> tau_samples_;
  int rounds_since_flush_ = 0;
  AdamState adam_;
  std::vector<double> divergence_;
  RunOutput out_;
  std::vector<double> feat_buf_;
  std::vector<int> label_buf_;
};

void ExperimentRun::setup() {
  cfg_.validate();
  const std::uint64_t seed = cfg_.seed;

  dataset_ = make_synthetic_dataset(cfg_.data.spec, derive_seed(seed, kDataStream));
  const std::size_t val_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(cfg_.data.val_fraction *
                                             static_cast<double>(dataset_.samples))));
  train_count_ = dataset_.samples - val_count;
  if (train_count_ < cfg_.devices.count) {
    throw ConfigError("not enough training samples to shard across devices");
  }
  val_batch_ = Batch{dataset_.features.data() + train_count_ * dataset_.dim,
                     dataset_.labels.data() + train_count_, val_count, dataset_.dim};

  global_ = init_model(cfg_.arch, derive_seed(seed, kInitStream));
  index_ = partition_blocks(global_, cfg_.policy.block_size);
  structural_ = structural_attention(index_, global_.depth_count());

  // Traces: loaded from file or generated per device.
  std::vector<BandwidthTrace> traces;
  if (!cfg_.devices.trace_file.empty()) {
    traces = load_traces(cfg_.devices.trace_file);
    if (traces.size() < cfg_.devices.count) {
      throw ConfigError("trace file has fewer devices than configured");
    }
    traces.resize(cfg_.devices.count);
    for (std::size_t k = 0; k < traces.size(); ++k) {
      if (traces[k].device_id != static_cast<int>(k)) {
        throw ConfigError("trace file must cover device ids 0..K-1");
      }
    }
  } else {
    for (std::size_t k = 0; k < cfg_.devices.count; ++k) {
      traces.push_back(gen_trace(cfg_.devices.trace,
                                 derive_seed(seed, kTraceStream, k),
                                 static_cast<int>(k)));
    }
  }

  // Device shards: contiguous, even within one sample.
  const std::size_t base = train_count_ / cfg_.devices.count;
  const std::size_t rem = train_count_ % cfg_.devices.count;
  std::size_t start = 0;
  GradStatsConfig stats_cfg{cfg_.policy.rho, cfg_.policy.window};
  Rng profile_rng(derive_seed(seed, kProfileStream));
  devices_.reserve(cfg_.devices.count);
  for (std::size_t k = 0; k < cfg_.devices.count; ++k) {
    devices_.emplace_back(global_.size(), index_.count(), stats_cfg,
                          cfg_.policy.gamma, cfg_.policy.lambda);
    DeviceRuntime& dev = devices_.back();
    const std::size_t count = base + (k < rem ? 1 : 0);
    dev.shard.resize(count);
    std::iota(dev.shard.begin(), dev.shard.end(), start);
    start += count;
    dev.batches_per_epoch =
        (count + cfg_.training.batch_size - 1) / cfg_.training.batch_size;
    dev.model = global_;
    dev.profile.device_id = static_cast<int>(k);
    dev.profile.trace_id = traces[k].device_id;
    dev.profile.dataset_size = count;
    dev.profile.compute_time_per_batch_s =
        profile_rng.uniform(cfg_.devices.compute_time_lo_s, cfg_.devices.compute_time_hi_s);
    dev.profile.reliability =
        profile_rng.uniform(cfg_.devices.reliability_lo, cfg_.devices.reliability_hi);
  }

  std::vector<DeviceProfile> profiles;
  for (const DeviceRuntime& d : devices_) profiles.push_back(d.profile);
  weights_ = device_weights(profiles, cfg_.policy.weight_mode == "size_only"
                                          ? WeightMode::kSizeOnly
                                          : WeightMode::kSizeTimesReliability);

  clusters_ = cluster_devices(profiles, traces, static_cast<int>(cfg_.policy.clusters),
                              derive_seed(seed, kClusterStream), cfg_.schedule());
  for (std::size_t k = 0; k < devices_.size(); ++k) {
    devices_[k].cluster = clusters_.cluster_of[k];
  }

  sim_ = std::make_unique<NetSim>(std::move(traces));
  cache_ = std::make_unique<GradientCache>(cfg_.devices.count, index_.count(),
                                           cfg_.policy.lambda);
  cloud_stats_ = GradStats(index_.count(), stats_cfg);
  attn_params_ = TemporalAttentionParams{cfg_.policy.w1, cfg_.policy.w2};

  report_.divergence.assign(cfg_.devices.count, 0.0);
  report_.sync_interval = cfg_.policy.initial_interval;
  report_.interval_min = cfg_.policy.interval_min;
  report_.interval_max = cfg_.policy.interval_max;
  if (cfg_.policy.tau_mode == "fixed") {
    report_.tau = cfg_.policy.tau;
    tau_ready_ = true;
  }

  if (cfg_.training.optimizer == "adamw") {
    adam_.m.assign(global_.size(), 0.0);
    adam_.v.assign(global_.size(), 0.0);
  }
  divergence_.assign(cfg_.devices.count, 0.0);
}

void ExperimentRun::next_batch(std::size_t k, std::vector<double>& feat,
                               std::vector<int>& labels) {
  DeviceRuntime& dev = devices_[k];
  if (dev.batch_cursor == 0) {
    dev.order = dev.shard;
    Rng rng(derive_seed(cfg_.seed, kShuffleStream,
                        (static_cast<std::uint64_t>(k) << 32) | dev.epoch_index));
    rng.shuffle(dev.order);
  }
  const std::size_t begin = dev.batch_cursor * cfg_.training.batch_size;
  const std::size_t end =
      std::min(begin + cfg_.training.batch_size, dev.order.size());
  const std::size_t count = end - begin;
  feat.resize(count * dataset_.dim);
  labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t sample = dev.order[begin + i];
    std::copy_n(dataset_.features.data() + sample * dataset_.dim, dataset_.dim,
                feat.data() + i * dataset_.dim);
    labels[i] = dataset_.labels[sample];
  }
  ++dev.batch_cursor;
  if (dev.batch_cursor >= dev.batches_per_epoch) {
    dev.batch_cursor = 0;
    ++dev.epoch_index;
  }
}

void ExperimentRun::local_training(std::size_t k, GradientVector& grad_sum,
                                   double& loss_sum, std::size_t& batch_count) {
  DeviceRuntime& dev = devices_[k];
  grad_sum.values.assign(global_.size(), 0.0);
  for (std::size_t b = 0; b < cfg_.training.local_batches_per_round; ++b) {
    next_batch(k, feat_buf_, label_buf_);
    Batch batch{feat_buf_.data(), label_buf_.data(), label_buf_.size(), dataset_.dim};
    BackwardResult res = backward_with_loss(dev.model, batch);
    apply_update(dev.model, res.grad, cfg_.training.lr);
    for (std::size_t i = 0; i < grad_sum.values.size(); ++i) {
      grad_sum.values[i] += res.grad.values[i];
    }
    loss_sum += res.loss;
    ++batch_count;
  }
}

void ExperimentRun::global_step(const GradientVector& g) {
  if (cfg_.training.optimizer == "sgd") {
    apply_update(global_, g, cfg_.training.lr);
    return;
  }
  // adamw on the aggregated update, decoupled weight decay.
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++adam_.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_.t));
  for (std::size_t i = 0; i < global_.size(); ++i) {
    const double gi = g.values[i];
    adam_.m[i] = kBeta1 * adam_.m[i] + (1.0 - kBeta1) * gi;
    adam_.v[i] = kBeta2 * adam_.v[i] + (1.0 - kBeta2) * gi * gi;
    const double mhat = adam_.m[i] / bc1;
    const double vhat = adam_.v[i] / bc2;
    global_.values[i] -= cfg_.training.lr *
                         (mhat / (std::sqrt(vhat) + kEps) +
                          cfg_.training.weight_decay * global_.values[i]);
  }
}

void ExperimentRun::record_round(std::uint64_t round, std::uint64_t uplink,
                                 std::uint64_t downlink, double train_loss,
                                 double mean_c) {
  const std::size_t max_batches_per_epoch =
      std::max_element(devices_.begin(), devices_.end(),
                       [](const DeviceRuntime& a, const DeviceRuntime& b) {
                         return a.batches_per_epoch < b.batches_per_epoch;
                       })
          ->batches_per_epoch;
  const std::size_t rounds_per_epoch =
      (max_batches_per_epoch + cfg_.training.local_batches_per_round - 1) /
      cfg_.training.local_batches_per_round;

  MetricsRow row;
  row.round = round;
  row.epoch = (round - 1) / rounds_per_epoch + 1;
  row.uplink_bytes = uplink;
  row.downlink_bytes = downlink;
  row.train_loss = train_loss;
  const LossResult val = forward_loss(global_, val_batch_);
  row.val_accuracy = static_cast<double>(val.correct) / static_cast<double>(val_batch_.count);
  double mean_d = 0.0;
  double max_d = 0.0;
  for (double d : divergence_) {
    mean_d += d;
    max_d = std::max(max_d, d);
  }
  row.mean_divergence = mean_d / static_cast<double>(divergence_.size());
  row.max_divergence = max_d;
  switch (cfg_.method) {
    case Method::kAceSync:
      row.sync_interval = static_cast<std::uint64_t>(report_.sync_interval);
      break;
    case Method::kFedAvgPeriodic:
      row.sync_interval = cfg_.baseline.fedavg_period;
      break;
    default:
      row.sync_interval = 1;
  }
  row.mean_compression_c = mean_c;
  row.sim_time_s = sim_->now();
  out_.log.rows.push_back(row);
}

RunOutput ExperimentRun::run() {
  setup();

  const std::size_t n = global_.size();
  const std::size_t n_devices = devices_.size();
  const std::uint64_t full_message_bytes =
      kMessageHeaderBytes + static_cast<std::uint64_t>(index_.count()) * kBlockHeaderBytes +
      full_precision_payload_bytes(n);
  std::vector<int> all_targets(n_devices);
  std::iota(all_targets.begin(), all_targets.end(), 0);

  bool rebase_all = true;  // round 1 starts from the shared init

  for (std::uint64_t round = 1; round <= cfg_.training.rounds; ++round) {
    const double round_start = sim_->now();
    const bool fedavg_sync = cfg_.method == Method::kFedAvgPeriodic &&
                             round % cfg_.baseline.fedavg_period == 0;
    bool flush = false;
    if (cfg_.method == Method::kAceSync) {
      ++rounds_since_flush_;
      if (rounds_since_flush_ >= report_.sync_interval) {
        flush = true;
        rounds_since_flush_ = 0;
      }
    }

    double loss_sum = 0.0;
    std::size_t batch_count = 0;
    double c_sum = 0.0;
    std::uint64_t uplink_round = 0;
    std::vector<GradientVector> cloud_updates(n_devices);
    std::vector<std::vector<TransmittedBlock>> payloads(n_devices);
    double max_compute_end = round_start;

    for (std::size_t k = 0; k < n_devices; ++k) {
      DeviceRuntime& dev = devices_[k];
      if (rebase_all) dev.model = global_;

      GradientVector grad_sum;
      local_training(k, grad_sum, loss_sum, batch_count);
      const double t_send =
          round_start + dev.profile.compute_time_per_batch_s *
                            static_cast<double>(cfg_.training.local_batches_per_round);
      max_compute_end = std::max(max_compute_end, t_send);

      switch (cfg_.method) {
        case Method::kAceSync: {
          const bool ef_on = cfg_.policy.gamma > 0.0;
          GradientVector corrected =
              ef_on ? apply_error_feedback(grad_sum, dev.ef) : grad_sum;
          update_grad_stats(dev.stats, corrected, index_);
          const std::vector<double> temporal =
              temporal_attention(dev.stats, attn_params_);
          const ImportanceScore importance =
              fuse_importance(temporal, structural_, cfg_.policy.alpha);

          const CompressionSchedule& sched =
              clusters_.schedule_of(static_cast<int>(k));
          const TraceSample link = sample_bandwidth(sim_->trace_of(dev.profile.trace_id), t_send);
          const double c = schedule_ratio(link.bandwidth_mbps, sched);
          const ByteBudget budget = byte_budget(
              link.bandwidth_mbps, cfg_.policy.budget_window_s, kMessageHeaderBytes);
          const TransmissionPlan plan = select_under_budget(
              importance, cfg_.policy.p, c, sched, index_, budget, flush);

          GradientVector sent;
          sent.values.assign(n, 0.0);
          std::vector<TransmittedBlock>& message = payloads[k];
          for (const BlockPlan& bp : plan.blocks) {
            const Block& blk = index_.blocks[static_cast<std::size_t>(bp.block_id)];
            TransmittedBlock tb;
            tb.block_id = bp.block_id;
            tb.full_precision = bp.full_precision;
            const double* src = corrected.values.data() + blk.offset;
            if (bp.full_precision) {
              tb.values.assign(src, src + blk.len);
              std::copy_n(src, blk.len, sent.values.data() + blk.offset);
            } else {
              tb.quantized = quantize_block({src, blk.len}, bp.bits, bp.block_id);
              const std::vector<double> deq = dequantize_block(tb.quantized);
              std::copy(deq.begin(), deq.end(), sent.values.data() + blk.offset);
            }
            message.push_back(std::move(tb));
          }
          if (cfg_.policy.lambda > 0.0) {
            // Mirror the cloud cache so the residual reflects what the cloud
            // will actually inject for the blocks this round skipped.
            const SelectionResult sel = plan.selection();
            for (const Block& blk : index_.blocks) {
              if (sel.contains(blk.block_id)) {
                const double* s = sent.values.data() + blk.offset;
                dev.sent_mirror.store(0, blk.block_id,
                                      std::vector<double>(s, s + blk.len), round);
              } else if (const std::vector<double>* cached =
                             dev.sent_mirror.lookup(0, blk.block_id)) {
                for (std::size_t i = 0; i < blk.len; ++i) {
                  sent.values[blk.offset + i] = cfg_.policy.lambda * (*cached)[i];
                }
              }
            }
          }

          uplink_round += plan.total_bytes;
          sim_->transmit(static_cast<int>(k), NetSim::kCloudId, plan.total_bytes, t_send);

          if (audit_) {
            const std::vector<double> residual_before = dev.ef.residual;
            if (ef_on) accumulate_residual(dev.ef, corrected, sent);
            audit_(RoundAudit{round, static_cast<int>(k), grad_sum.values,
                              corrected.values, sent.values, residual_before,
                              dev.ef.residual});
          } else if (ef_on) {
            accumulate_residual(dev.ef, corrected, sent);
          }
          c_sum += c;
          break;
        }
        case Method::kFullSync: {
          cloud_updates[k] = grad_sum;
          uplink_round += full_message_bytes;
          sim_->transmit(static_cast<int>(k), NetSim::kCloudId, full_message_bytes, t_send);
          break;
        }
        case Method::kTopK: {
          // Classic error feedback: full residual reinjection.
          GradientVector corrected = grad_sum;
          for (std::size_t i = 0; i < n; ++i) corrected.values[i] += dev.ef.residual[i];
          const std::size_t count = ceil_fraction(cfg_.baseline.topk_fraction, n);
          std::vector<std::size_t> idx(n);
          std::iota(idx.begin(), idx.end(), 0);
          std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(count), idx.end(),
                            [&](std::size_t a, std::size_t b) {
                              const double ma = std::abs(corrected.values[a]);
                              const double mb = std::abs(corrected.values[b]);
                              if (ma != mb) return ma > mb;
                              return a < b;
                            });
          GradientVector sent;
          sent.values.assign(n, 0.0);
          for (std::size_t i = 0; i < count; ++i) {
            sent.values[idx[i]] = corrected.values[idx[i]];
          }
          // Sparse framing: 4-byte index + 4-byte value per coordinate.
          const std::uint64_t bytes = kMessageHeaderBytes + 8 * static_cast<std::uint64_t>(count);
          uplink_round += bytes;
          sim_->transmit(static_cast<int>(k), NetSim::kCloudId, bytes, t_send);
          accumulate_residual(dev.ef, corrected, sent);
          cloud_updates[k] = std::move(sent);
          break;
        }
        case Method::kFedAvgPeriodic: {
          if (fedavg_sync) {
            uplink_round += full_message_bytes;
            sim_->transmit(static_cast<int>(k), NetSim::kCloudId, full_message_bytes, t_send);
          }
          break;
        }
      }
    }

    // Cloud barrier: wait for every uplink.
    sim_->advance_to(max_compute_end);
    while (sim_->step()) {
    }

    std::uint64_t downlink_round = 0;
    bool broadcast = true;
    switch (cfg_.method) {
      case Method::kAceSync: {
        for (std::size_t k = 0; k < n_devices; ++k) {
          cloud_updates[k].values = reconstruct_update(payloads[k], *cache_, index_,
                                                       static_cast<int>(k), round);
        }
        const GradientVector g = aggregate(cloud_updates, weights_);
        out_.round_updates.push_back(g.values);
        global_step(g);

        for (std::size_t k = 0; k < n_devices; ++k) {
          divergence_[k] = compute_divergence(devices_[k].model, global_);
        }
        report_.divergence = divergence_;
        if (!tau_ready_) {
          tau_samples_.insert(tau_samples_.end(), divergence_.begin(), divergence_.end());
          if (round == 5 || round == cfg_.training.rounds) {
            std::vector<double> sorted = tau_samples_;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t m = sorted.size();
            const double median = m % 2 == 1
                                      ? sorted[m / 2]
                                      : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
            report_.tau = 0.5 * median;
            tau_ready_ = true;
          }
        } else {
          report_ = adjust_sync_interval(report_);
        }

        update_grad_stats(cloud_stats_, g, index_);
        attn_params_ = calibrate_attention(attn_params_, cloud_stats_);
        break;
      }
      case Method::kFullSync:
      case Method::kTopK: {
        const GradientVector g = aggregate(cloud_updates, weights_);
        out_.round_updates.push_back(g.values);
        global_step(g);
        for (std::size_t k = 0; k < n_devices; ++k) {
          divergence_[k] = compute_divergence(devices_[k].model, global_);
        }
        break;
      }
      case Method::kFedAvgPeriodic: {
        if (fedavg_sync) {
          std::vector<GradientVector> models(n_devices);
          for (std::size_t k = 0; k < n_devices; ++k) {
            models[k].values = devices_[k].model.values;
          }
          const GradientVector averaged = aggregate(models, weights_);
          global_.values = averaged.values;
        }
        out_.round_updates.emplace_back();
        for (std::size_t k = 0; k < n_devices; ++k) {
          divergence_[k] = compute_divergence(devices_[k].model, global_);
        }
        broadcast = fedavg_sync;
        break;
      }
    }

    if (broadcast) {
      const double t_agg = sim_->now();
      for (const DeliveryRequest& req : broadcast_global(global_, all_targets, index_)) {
        downlink_round += req.bytes;
        sim_->transmit(NetSim::kCloudId, req.device_id, req.bytes, t_agg);
      }
      while (sim_->step()) {
      }
    }
    rebase_all = cfg_.method != Method::kFedAvgPeriodic || fedavg_sync;

    const double train_loss = batch_count > 0 ? loss_sum / static_cast<double>(batch_count) : 0.0;
    const double mean_c =
        cfg_.method == Method::kAceSync ? c_sum / static_cast<double>(n_devices) : 0.0;
    record_round(round, uplink_round, downlink_round, train_loss, mean_c);
  }

  out_.final_model = global_;
  out_.uplink_bytes = sim_->total_uplink();
  out_.downlink_bytes = sim_->total_downlink();
  out_.tau = tau_ready_ ? report_.tau : 0.0;
  return out_;
}

}  // namespace

RunOutput run_method(const ExperimentConfig& config, const AuditHook& audit) {
  ExperimentRun run(config, audit);
  return run.run();
}

MetricsLog run_experiment(const ExperimentConfig& config) {
  if (config.method != Method::kAceSync) {
    throw ConfigError("run_experiment expects the adaptive method");
  }
  return run_method(config).log;
}

MetricsLog run_baseline(const ExperimentConfig& config) {
  if (config.method == Method::kAceSync) {
    throw ConfigError("run_baseline expects fullsync, topk, or fedavg_periodic");
  }
  return run_method(config).log;
}

std::uint64_t convergence_epoch(const MetricsLog& log, double final_accuracy) {
  if (log.rows.empty()) throw ConfigError("convergence_epoch needs a non-empty log");
  std::map<std::uint64_t, double> last_acc;  // epoch -> accuracy at epoch end
  for (const MetricsRow& r : log.rows) last_acc[r.epoch] = r.val_accuracy;
  const double threshold = 0.99 * final_accuracy;
  for (const auto& [epoch, acc] : last_acc) {
    if (acc >= threshold) return epoch;
  }
  return last_acc.rbegin()->first;
}

std::uint64_t convergence_epoch(const MetricsLog& log) {
  if (log.rows.empty()) throw ConfigError("convergence_epoch needs a non-empty log");
  return convergence_epoch(log, log.rows.back().val_accuracy);
}

ComparisonReport compare(const ExperimentConfig& base,
                         const std::vector<Method>& methods,
                         const std::vector<std::uint64_t>& seeds) {
  base.validate();
  if (methods.size() < 2) throw ConfigError("compare needs at least two methods");
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  if (base.training.rounds == 0) throw ConfigError("compare needs rounds >= 1");

  ComparisonReport report;
  for (Method m : methods) {
    double acc = 0.0;
    double gb = 0.0;
    double conv = 0.0;
    double loss = 0.0;
    for (std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.method = m;
      cfg.seed = seed;
      const RunOutput out = run_method(cfg);
      acc += out.log.rows.back().val_accuracy;
      gb += static_cast<double>(out.log.total_uplink_bytes()) / 1e9;
      conv += static_cast<double>(convergence_epoch(out.log));
      loss += out.log.rows.back().train_loss;
    }
    const double count = static_cast<double>(seeds.size());
    report.rows.push_back(
        {method_name(m), acc / count, gb / count, conv / count, loss / count});
  }
  return report;
}

}  // namespace acesync
