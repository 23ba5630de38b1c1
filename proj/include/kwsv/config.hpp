// Copyright 2026 The kwsv Authors. All rights reserved.
//
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kwsv/asv.hpp"
#include "kwsv/bundle_io.hpp"
#include "kwsv/memory_budget.hpp"
#include "kwsv/pipeline.hpp"
#include "kwsv/stream_config.hpp"

namespace kwsv {

/// Everything needed to stand up a pipeline, read from a JSON file:
///
///   {
///     "sample_rate_hz": 16000, "window_seconds": 1.0, "hop_seconds": 0.25,
///     "frame_seconds": 0.03, "frame_stride_seconds": 0.02, "num_mel_bins": 40,
///     "n": 16, "tau": 0.8, "refractory_hops": 2,
///     "ks_bundle": "models/ks.twb", "dvector_bundle": "models/dvector.twb",
///     "enrollment_path": "state/enrollment.kwse",
///     "memory_limit_bytes": 1048576, "port": 8765, "static_dir": ""
///   }
///
/// Relative paths are resolved against the directory holding the file.
struct PipelineConfig {
  StreamConfig stream;
  std::size_t n = 16;
  float tau = kDefaultThreshold;
  std::size_t refractory_hops = kDefaultRefractoryHops;
  std::string ks_bundle;
  std::string dvector_bundle;
  std::string enrollment_path;
  std::size_t memory_limit_bytes = kDefaultMemoryLimit;
  int port = 8765;
  std::string static_dir;
};

inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base = {}) {
  PipelineConfig c;
  try {
    c.stream = stream_config_from_json(j);
    c.n = j.value("n", c.n);
    c.tau = j.value("tau", c.tau);
    c.refractory_hops = j.value("refractory_hops", c.refractory_hops);
    c.memory_limit_bytes = j.value("memory_limit_bytes", c.memory_limit_bytes);
    c.port = j.value("port", c.port);
    const auto path = [&](const char* key) -> std::string {
      std::string p = j.value(key, std::string());
      if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
      return (base / p).string();
    };
    c.ks_bundle = path("ks_bundle");
    c.dvector_bundle = path("dvector_bundle");
    c.enrollment_path = path("enrollment_path");
    c.static_dir = path("static_dir");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.n == 0) throw ConfigError("config: n must be positive");
  if (!(c.tau >= -1.0f && c.tau <= 1.0f)) throw ConfigError("config: tau must lie in [-1, 1]");
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

/// Loads both bundles, checks them against the budget and the front-end, and
/// restores the persisted enrollment (if any). Throws BudgetExceeded before
/// any runtime object is built when the estimate does not fit.
inline BundlePipeline load_pipeline(const PipelineConfig& c) {
  if (c.ks_bundle.empty() || c.dvector_bundle.empty())
    throw ConfigError("config must name ks_bundle and dvector_bundle");
  nn::WeightBundle ks = nn::load_bundle(c.ks_bundle);
  nn::WeightBundle dv = nn::load_bundle(c.dvector_bundle);
  estimate_memory(c.stream, ks, dv, c.n, c.memory_limit_bytes).enforce();
  const auto fp = front_end_fingerprint(c.stream);
  for (const auto* b : {&ks, &dv})
    if (!b->front_end.is_null() && b->front_end != fp)
      throw FingerprintMismatch("bundle '" + b->name + "' does not match the configured front-end");

  EnrollmentSet set(c.n, c.tau);
  if (!c.enrollment_path.empty() && std::filesystem::exists(c.enrollment_path)) {
    EnrollmentSet stored = load_enrollment(c.enrollment_path);
    if (stored.capacity() != c.n)
      throw ConfigError("persisted enrollment has n=" + std::to_string(stored.capacity()) +
                        ", config says n=" + std::to_string(c.n));
    set = std::move(stored);
  }
  return BundlePipeline(c.stream, KeywordSpotter(std::move(ks)), DVectorExtractor(std::move(dv)),
                        std::move(set), c.refractory_hops);
}

}  // namespace kwsv
