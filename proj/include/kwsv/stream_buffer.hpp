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
#include <cstdint>
#include <span>
#include <vector>

#include "kwsv/error.hpp"
#include "kwsv/stream_config.hpp"

namespace kwsv {

/// One analysis window I_t of 16-bit PCM.
struct AudioWindow {
  std::vector<std::int16_t> samples;
  std::uint64_t start_sample = 0;
  double start_time = 0.0;  // seconds from stream origin
};

/// Largest chunk the demo service accepts in one message (64 KiB of PCM16).
inline constexpr std::size_t kMaxChunkSamples = 32768;

/// Cuts a continuous PCM stream into overlapping windows.
///
/// Window k covers samples [k*hop, k*hop + W) and is emitted as soon as its
/// last sample arrives. Only the most recent W samples are retained. Single
/// producer / single consumer: one context pushes, the same context receives
/// the emitted windows.
class StreamBuffer {
 public:
  explicit StreamBuffer(const StreamConfig& cfg, std::size_t capacity = 0)
      : cfg_(cfg),
        capacity_(capacity == 0 ? cfg.window_samples + kMaxChunkSamples : capacity),
        ring_(cfg.window_samples, 0) {
    cfg_.validate();
    if (capacity_ < cfg_.window_samples)
      throw ConfigError("ring capacity must hold at least one window");
    next_end_ = cfg_.window_samples;
  }

  /// Appends a chunk and returns every window completed by it, oldest first.
  /// A chunk larger than the ring capacity is rejected whole.
  std::vector<AudioWindow> push_samples(std::span<const std::int16_t> chunk) {
    if (chunk.size() > capacity_) throw OverrunError(chunk.size());
    std::vector<AudioWindow> out;
    const std::size_t w = cfg_.window_samples;
    for (std::int16_t s : chunk) {
      ring_[total_ % w] = s;
      ++total_;
      if (total_ == next_end_) {
        out.push_back(snapshot());
        next_end_ += cfg_.hop_samples;
      }
    }
    return out;
  }

  void reset() {
    total_ = 0;
    next_end_ = cfg_.window_samples;
    std::fill(ring_.begin(), ring_.end(), std::int16_t{0});
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t samples_received() const noexcept { return total_; }
  const StreamConfig& config() const noexcept { return cfg_; }

 private:
  AudioWindow snapshot() const {
    const std::size_t w = cfg_.window_samples;
    AudioWindow win;
    win.samples.resize(w);
    const std::size_t oldest = total_ % w;
    for (std::size_t i = 0; i < w; ++i) win.samples[i] = ring_[(oldest + i) % w];
    win.start_sample = total_ - w;
    win.start_time = cfg_.seconds(static_cast<std::size_t>(win.start_sample));
    return win;
  }

  StreamConfig cfg_;
  std::size_t capacity_;
  std::vector<std::int16_t> ring_;
  std::uint64_t total_ = 0;
  std::uint64_t next_end_ = 0;
};

}  // namespace kwsv
