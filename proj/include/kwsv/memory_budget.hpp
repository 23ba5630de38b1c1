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

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "kwsv/bundle.hpp"
#include "kwsv/error.hpp"
#include "kwsv/stream_config.hpp"

namespace kwsv {

inline constexpr std::size_t kPcmBytes = 2;     // b1
inline constexpr std::size_t kValueBytes = 4;   // b
inline constexpr std::size_t kDefaultMemoryLimit = 1048576;

struct MemoryItem {
  std::string component;
  std::string formula;
  std::size_t bytes = 0;
};

/// Static memory estimate of the whole pipeline.
struct MemoryBudget {
  std::vector<MemoryItem> items;
  std::size_t limit_bytes = kDefaultMemoryLimit;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& i : items) t += i.bytes;
    return t;
  }
  bool fits() const { return total() <= limit_bytes; }
  std::size_t bytes(const std::string& component) const {
    for (const auto& i : items)
      if (i.component == component) return i.bytes;
    throw Error("no memory item named " + component);
  }

  /// Throws BudgetExceeded, listing components largest first.
  void enforce() const {
    if (fits()) return;
    auto sorted = items;
    std::sort(sorted.begin(), sorted.end(),
              [](const MemoryItem& a, const MemoryItem& b) { return a.bytes > b.bytes; });
    std::string msg = "memory estimate " + std::to_string(total()) + " B exceeds limit " +
                      std::to_string(limit_bytes) + " B:";
    for (const auto& i : sorted) msg += " " + i.component + "=" + std::to_string(i.bytes) + "B";
    throw BudgetExceeded(msg);
  }
};

struct NetworkSize {
  std::size_t omega = 0;
  std::size_t alpha = 0;
};

inline NetworkSize network_size(const nn::WeightBundle& b) {
  const auto r = nn::count_params(b);
  return {r.omega_total, r.alpha_total};
}

/// Closed-form estimate of every component: window f_r*W*b1, spectrogram
/// i*j*b, d-vector d*b, network weights ω*b and activations α*b, and the
/// enrollment model d*n*b.
inline MemoryBudget estimate_memory(const StreamConfig& cfg, NetworkSize ks, NetworkSize dvec,
                                    std::size_t d, std::size_t n,
                                    std::size_t limit = kDefaultMemoryLimit) {
  MemoryBudget m;
  m.limit_bytes = limit;
  m.items = {
      {"I_t", "(f_r x W) x b1", cfg.window_samples * kPcmBytes},
      {"P_t", "(i x j) x b", cfg.num_mel_bins * frame_count(cfg) * kValueBytes},
      {"D_t", "d x b", d * kValueBytes},
      {"Phi_k weights", "omega_k x b", ks.omega * kValueBytes},
      {"Phi_k activations", "alpha_k x b", ks.alpha * kValueBytes},
      {"Phi_f weights", "omega_f x b", dvec.omega * kValueBytes},
      {"Phi_f activations", "alpha_f x b", dvec.alpha * kValueBytes},
      {"Phi_c", "(d x n) x b", d * n * kValueBytes},
  };
  return m;
}

inline MemoryBudget estimate_memory(const StreamConfig& cfg, const nn::WeightBundle& ks,
                                    const nn::WeightBundle& dvec, std::size_t n,
                                    std::size_t limit = kDefaultMemoryLimit) {
  return estimate_memory(cfg, network_size(ks), network_size(dvec), dvec.output_shape().size(), n,
                         limit);
}

}  // namespace kwsv
