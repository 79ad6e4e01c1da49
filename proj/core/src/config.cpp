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

#include "acesync/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace acesync {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value type for key '") + key + "'");
  }
}

void read_range(const json& obj, const char* key, double& lo, double& hi) {
  if (!obj.contains(key)) return;
  const json& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 2) {
    throw ConfigError(std::string("key '") + key + "' must be a [lo, hi] pair");
  }
  lo = arr[0].get<double>();
  hi = arr[1].get<double>();
}

}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "acesync") return Method::kAceSync;
  if (name == "fullsync") return Method::kFullSync;
  if (name == "topk") return Method::kTopK;
  if (name == "fedavg_periodic") return Method::kFedAvgPeriodic;
  throw ConfigError("unknown method '" + name +
                    "' (expected acesync|fullsync|topk|fedavg_periodic)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kAceSync:
      return "acesync";
    case Method::kFullSync:
      return "fullsync";
    case Method::kTopK:
      return "topk";
    case Method::kFedAvgPeriodic:
      return "fedavg_periodic";
  }
  throw ConfigError("invalid method enum value");
}

CompressionSchedule ExperimentConfig::schedule() const {
  CompressionSchedule s;
  s.c_min = policy.c_min;
  s.c_max = policy.c_max;
  s.beta = policy.beta;
  s.b_min = policy.b_min;
  s.b_max = policy.b_max;
  return s;
}

void ExperimentConfig::validate() const {
  if (arch.size() < 2) throw ConfigError("arch needs at least two widths");
  for (std::size_t w : arch) {
    if (w == 0) throw ConfigError("arch widths must be >= 1");
  }
  if (data.spec.classes < 2 || data.spec.samples < data.spec.classes ||
      data.spec.features == 0) {
    throw ConfigError("data spec requires M >= C >= 2 and D >= 1");
  }
  if (data.spec.features != arch.front()) {
    throw ConfigError("arch input width must equal the data feature count");
  }
  if (data.spec.classes != arch.back()) {
    throw ConfigError("arch output width must equal the class count");
  }
  if (data.spec.noise_sigma < 0.0 || data.spec.class_sep < 0.0) {
    throw ConfigError("noise_sigma and class_sep must be >= 0");
  }
  if (!(data.val_fraction > 0.0 && data.val_fraction < 1.0)) {
    throw ConfigError("val_fraction must be in (0, 1)");
  }
  if (devices.count == 0) throw ConfigError("device count must be >= 1");
  if (!(devices.compute_time_lo_s > 0.0 &&
        devices.compute_time_lo_s <= devices.compute_time_hi_s)) {
    throw ConfigError("compute time range must be positive and ordered");
  }
  if (!(devices.reliability_lo >= 0.0 &&
        devices.reliability_lo <= devices.reliability_hi &&
        devices.reliability_hi <= 1.0)) {
    throw ConfigError("reliability range must lie within [0, 1]");
  }
  if (devices.trace_file.empty()) devices.trace.validate();
  if (training.local_batches_per_round == 0 || training.batch_size == 0) {
    throw ConfigError("batch size and local batches must be >= 1");
  }
  if (!(training.lr > 0.0)) throw ConfigError("lr must be > 0");
  if (training.optimizer != "sgd" && training.optimizer != "adamw") {
    throw ConfigError("optimizer must be 'sgd' or 'adamw'");
  }
  if (training.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (!(policy.p >= 0.0 && policy.p <= 1.0)) throw ConfigError("p must be in [0, 1]");
  if (!(policy.alpha >= 0.0 && policy.alpha <= 1.0)) {
    throw ConfigError("alpha must be in [0, 1]");
  }
  if (!(policy.rho >= 0.0 && policy.rho < 1.0)) throw ConfigError("rho must be in [0, 1)");
  if (policy.window == 0) throw ConfigError("stats window must be >= 1");
  schedule().validate();
  if (policy.gamma < 0.0) throw ConfigError("gamma must be >= 0");
  if (!(policy.lambda >= 0.0 && policy.lambda <= 1.0)) {
    throw ConfigError("lambda must be in [0, 1]");
  }
  if (policy.tau_mode != "auto" && policy.tau_mode != "fixed") {
    throw ConfigError("tau_mode must be 'auto' or 'fixed'");
  }
  if (policy.tau_mode == "fixed" && !(policy.tau > 0.0)) {
    throw ConfigError("fixed tau must be > 0");
  }
  if (policy.interval_min < 1 || policy.interval_min > policy.interval_max) {
    throw ConfigError("interval bounds require 1 <= I_min <= I_max");
  }
  if (policy.initial_interval < policy.interval_min ||
      policy.initial_interval > policy.interval_max) {
    throw ConfigError("initial_interval must lie within the interval bounds");
  }
  if (policy.block_size == 0) throw ConfigError("block_size must be >= 1");
  if (policy.clusters < 1 || policy.clusters > devices.count) {
    throw ConfigError("clusters must be in [1, device count]");
  }
  if (!(policy.budget_window_s > 0.0)) {
    throw ConfigError("budget_window_s must be > 0");
  }
  if (policy.weight_mode != "size_reliability" && policy.weight_mode != "size_only") {
    throw ConfigError("weight_mode must be 'size_reliability' or 'size_only'");
  }
  if (!(baseline.topk_fraction > 0.0 && baseline.topk_fraction <= 1.0)) {
    throw ConfigError("topk_fraction must be in (0, 1]");
  }
  if (baseline.fedavg_period == 0) throw ConfigError("fedavg_period must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");

  reject_unknown_keys(root, "config root",
                      {"method", "arch", "data", "devices", "training", "policy",
                       "baseline", "seed"});

  ExperimentConfig cfg;
  if (root.contains("method")) {
    cfg.method = method_from_string(root.at("method").get<std::string>());
  }
  read_field(root, "arch", cfg.arch);
  read_field(root, "seed", cfg.seed);

  if (root.contains("data")) {
    const json& d = root.at("data");
    reject_unknown_keys(d, "data",
                        {"samples", "features", "classes", "class_sep", "noise_sigma",
                         "val_fraction"});
    read_field(d, "samples", cfg.data.spec.samples);
    read_field(d, "features", cfg.data.spec.features);
    read_field(d, "classes", cfg.data.spec.classes);
    read_field(d, "class_sep", cfg.data.spec.class_sep);
    read_field(d, "noise_sigma", cfg.data.spec.noise_sigma);
    read_field(d, "val_fraction", cfg.data.val_fraction);
  }

  if (root.contains("devices")) {
    const json& d = root.at("devices");
    reject_unknown_keys(d, "devices",
                        {"count", "compute_time_s", "reliability", "trace",
                         "trace_file"});
    read_field(d, "count", cfg.devices.count);
    read_range(d, "compute_time_s", cfg.devices.compute_time_lo_s,
               cfg.devices.compute_time_hi_s);
    read_range(d, "reliability", cfg.devices.reliability_lo,
               cfg.devices.reliability_hi);
    read_field(d, "trace_file", cfg.devices.trace_file);
    if (d.contains("trace")) {
      const json& t = d.at("trace");
      reject_unknown_keys(t, "devices.trace",
                          {"duration_s", "step_s", "bandwidth_mbps", "latency_ms",
                           "jitter_sigma"});
      read_field(t, "duration_s", cfg.devices.trace.duration_s);
      read_field(t, "step_s", cfg.devices.trace.step_s);
      read_range(t, "bandwidth_mbps", cfg.devices.trace.bw_lo, cfg.devices.trace.bw_hi);
      read_range(t, "latency_ms", cfg.devices.trace.lat_lo, cfg.devices.trace.lat_hi);
      read_field(t, "jitter_sigma", cfg.devices.trace.jitter_sigma);
    }
  }

  if (root.contains("training")) {
    const json& t = root.at("training");
    reject_unknown_keys(t, "training",
                        {"rounds", "local_batches_per_round", "batch_size", "lr",
                         "optimizer", "weight_decay"});
    read_field(t, "rounds", cfg.training.rounds);
    read_field(t, "local_batches_per_round", cfg.training.local_batches_per_round);
    read_field(t, "batch_size", cfg.training.batch_size);
    read_field(t, "lr", cfg.training.lr);
    read_field(t, "optimizer", cfg.training.optimizer);
    read_field(t, "weight_decay", cfg.training.weight_decay);
  }

  if (root.contains("policy")) {
    const json& p = root.at("policy");
    reject_unknown_keys(p, "policy",
                        {"p", "alpha", "w1", "w2", "rho", "window", "beta", "c_min",
                         "c_max", "b_min", "b_max", "gamma", "lambda", "tau_mode",
                         "tau", "interval_min", "interval_max", "initial_interval",
                         "block_size", "clusters", "budget_window_s", "weight_mode"});
    read_field(p, "p", cfg.policy.p);
    read_field(p, "alpha", cfg.policy.alpha);
    read_field(p, "w1", cfg.policy.w1);
    read_field(p, "w2", cfg.policy.w2);
    read_field(p, "rho", cfg.policy.rho);
    read_field(p, "window", cfg.policy.window);
    read_field(p, "beta", cfg.policy.beta);
    read_field(p, "c_min", cfg.policy.c_min);
    read_field(p, "c_max", cfg.policy.c_max);
    read_field(p, "b_min", cfg.policy.b_min);
    read_field(p, "b_max", cfg.policy.b_max);
    read_field(p, "gamma", cfg.policy.gamma);
    read_field(p, "lambda", cfg.policy.lambda);
    read_field(p, "tau_mode", cfg.policy.tau_mode);
    read_field(p, "tau", cfg.policy.tau);
    read_field(p, "interval_min", cfg.policy.interval_min);
    read_field(p, "interval_max", cfg.policy.interval_max);
    read_field(p, "initial_interval", cfg.policy.initial_interval);
    read_field(p, "block_size", cfg.policy.block_size);
    read_field(p, "clusters", cfg.policy.clusters);
    read_field(p, "budget_window_s", cfg.policy.budget_window_s);
    read_field(p, "weight_mode", cfg.policy.weight_mode);
  }

  if (root.contains("baseline")) {
    const json& b = root.at("baseline");
    reject_unknown_keys(b, "baseline", {"topk_fraction", "fedavg_period"});
    read_field(b, "topk_fraction", cfg.baseline.topk_fraction);
    read_field(b, "fedavg_period", cfg.baseline.fedavg_period);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["method"] = method_name(cfg.method);
  root["arch"] = cfg.arch;
  root["seed"] = cfg.seed;
  root["data"] = {{"samples", cfg.data.spec.samples},
                  {"features", cfg.data.spec.features},
                  {"classes", cfg.data.spec.classes},
                  {"class_sep", cfg.data.spec.class_sep},
                  {"noise_sigma", cfg.data.spec.noise_sigma},
                  {"val_fraction", cfg.data.val_fraction}};
  root["devices"] = {
      {"count", cfg.devices.count},
      {"compute_time_s", {cfg.devices.compute_time_lo_s, cfg.devices.compute_time_hi_s}},
      {"reliability", {cfg.devices.reliability_lo, cfg.devices.reliability_hi}},
      {"trace",
       {{"duration_s", cfg.devices.trace.duration_s},
        {"step_s", cfg.devices.trace.step_s},
        {"bandwidth_mbps", {cfg.devices.trace.bw_lo, cfg.devices.trace.bw_hi}},
        {"latency_ms", {cfg.devices.trace.lat_lo, cfg.devices.trace.lat_hi}},
        {"jitter_sigma", cfg.devices.trace.jitter_sigma}}},
      {"trace_file", cfg.devices.trace_file}};
  root["training"] = {{"rounds", cfg.training.rounds},
                      {"local_batches_per_round", cfg.training.local_batches_per_round},
                      {"batch_size", cfg.training.batch_size},
                      {"lr", cfg.training.lr},
                      {"optimizer", cfg.training.optimizer},
                      {"weight_decay", cfg.training.weight_decay}};
  root["policy"] = {{"p", cfg.policy.p},
                    {"alpha", cfg.policy.alpha},
                    {"w1", cfg.policy.w1},
                    {"w2", cfg.policy.w2},
                    {"rho", cfg.policy.rho},
                    {"window", cfg.policy.window},
                    {"beta", cfg.policy.beta},
                    {"c_min", cfg.policy.c_min},
                    {"c_max", cfg.policy.c_max},
                    {"b_min", cfg.policy.b_min},
                    {"b_max", cfg.policy.b_max},
                    {"gamma", cfg.policy.gamma},
                    {"lambda", cfg.policy.lambda},
                    {"tau_mode", cfg.policy.tau_mode},
                    {"tau", cfg.policy.tau},
                    {"interval_min", cfg.policy.interval_min},
                    {"interval_max", cfg.policy.interval_max},
                    {"initial_interval", cfg.policy.initial_interval},
                    {"block_size", cfg.policy.block_size},
                    {"clusters", cfg.policy.clusters},
                    {"budget_window_s", cfg.policy.budget_window_s},
                    {"weight_mode", cfg.policy.weight_mode}};
  root["baseline"] = {{"topk_fraction", cfg.baseline.topk_fraction},
                      {"fedavg_period", cfg.baseline.fedavg_period}};
  return root.dump(2);
}

}  // namespace acesync
