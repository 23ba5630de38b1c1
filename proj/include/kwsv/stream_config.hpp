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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "kwsv/error.hpp"

namespace kwsv {

/// Stream and framing parameters of the audio front-end.
///
/// All durations are held as sample counts so that every derived quantity
/// (frame count, hop schedule, buffer sizes) is exact integer arithmetic.
/// `from_seconds` converts and rejects durations that do not land on a whole
/// number of samples at the given rate.
struct StreamConfig {
  int sample_rate_hz = 16000;
  std::size_t window_samples = 16000;  // W = 1 s
  std::size_t hop_samples = 4000;      // 0.25 s advance (0.75 s overlap)
  std::size_t frame_samples = 480;     // 30 ms
  std::size_t stride_samples = 320;    // 20 ms
  std::size_t num_mel_bins = 40;

  static StreamConfig reference() { return {}; }

  static StreamConfig from_seconds(int sample_rate_hz, double window_s, double hop_s,
                                   double frame_s, double stride_s, std::size_t mel_bins) {
    StreamConfig c;
    c.sample_rate_hz = sample_rate_hz;
    if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be positive");
    c.window_samples = to_samples(sample_rate_hz, window_s, "window_seconds");
    c.hop_samples = to_samples(sample_rate_hz, hop_s, "hop_seconds");
    c.frame_samples = to_samples(sample_rate_hz, frame_s, "frame_seconds");
    c.stride_samples = to_samples(sample_rate_hz, stride_s, "frame_stride_seconds");
    c.num_mel_bins = mel_bins;
    c.validate();
    return c;
  }

  double window_seconds() const { return seconds(window_samples); }
  double hop_seconds() const { return seconds(hop_samples); }
  double frame_seconds() const { return seconds(frame_samples); }
  double frame_stride_seconds() const { return seconds(stride_samples); }
  double seconds(std::size_t samples) const {
    return static_cast<double>(samples) / static_cast<double>(sample_rate_hz);
  }

  void validate() const {
    if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be positive");
    if (frame_samples == 0 || frame_samples > window_samples)
      throw ConfigError("frame length must satisfy 0 < frame <= window");
    if (stride_samples == 0 || stride_samples > frame_samples)
      throw ConfigError("frame stride must satisfy 0 < stride <= frame");
    if (hop_samples == 0 || hop_samples > window_samples)
      throw ConfigError("hop must satisfy 0 < hop <= window");
    if (num_mel_bins == 0) throw ConfigError("num_mel_bins must be positive");
  }

  friend bool operator==(const StreamConfig&, const StreamConfig&) = default;

 private:
  static std::size_t to_samples(int rate, double s, const char* name) {
    const double exact = s * rate;
    const double rounded = std::round(exact);
    if (!(s > 0.0) || std::abs(exact - rounded) > 1e-6)
      throw ConfigError(std::string(name) + " does not span a whole number of samples");
    return static_cast<std::size_t>(rounded);
  }
};

/// Number of complete frames of `frame` samples, advanced by `stride`, that fit
/// in `window` samples: 1 + floor((W - λ) / φ).
inline std::size_t frame_count(std::size_t window, std::size_t frame, std::size_t stride) {
  if (frame == 0 || stride == 0) throw ConfigError("frame and stride must be positive");
  if (frame > window) throw ConfigError("frame length exceeds window length");
  return 1 + (window - frame) / stride;
}

inline std::size_t frame_count(const StreamConfig& c) {
  return frame_count(c.window_samples, c.frame_samples, c.stride_samples);
}

/// Fixed MFCC internals. These are not tunable at runtime; they are recorded
/// in every weight bundle so trainer and runtime agree.
struct MfccConstants {
  static constexpr double kMelLowHz = 20.0;
  static constexpr double kMelHighHz = 8000.0;
  static constexpr double kLogFloor = 1e-6;
  static constexpr double kPcmScale = 32768.0;
};

inline std::size_t fft_size_for(std::size_t frame_samples) {
  std::size_t n = 1;
  while (n < frame_samples) n <<= 1;
  return n;
}

/// Canonical description of the front-end a network was trained against.
inline nlohmann::json front_end_fingerprint(const StreamConfig& c) {
  return {
      {"sample_rate_hz", c.sample_rate_hz},
      {"window_samples", c.window_samples},
      {"frame_samples", c.frame_samples},
      {"stride_samples", c.stride_samples},
      {"num_mel_bins", c.num_mel_bins},
      {"window_function", "hamming"},
      {"fft_size", fft_size_for(c.frame_samples)},
      {"spectrum", "power"},
      {"mel_scale", "2595*log10(1+f/700)"},
      {"mel_low_hz", MfccConstants::kMelLowHz},
      {"mel_high_hz", MfccConstants::kMelHighHz},
      {"log", "natural"},
      {"log_floor", MfccConstants::kLogFloor},
      {"dct", "orthonormal-II"},
      {"num_coefficients", c.num_mel_bins},
      {"pcm_scale", MfccConstants::kPcmScale},
  };
}

inline nlohmann::json to_json(const StreamConfig& c) {
  return {{"sample_rate_hz", c.sample_rate_hz},
          {"window_seconds", c.window_seconds()},
          {"hop_seconds", c.hop_seconds()},
          {"frame_seconds", c.frame_seconds()},
          {"frame_stride_seconds", c.frame_stride_seconds()},
          {"num_mel_bins", c.num_mel_bins}};
}

inline StreamConfig stream_config_from_json(const nlohmann::json& j) {
  const StreamConfig d;
  return StreamConfig::from_seconds(
      j.value("sample_rate_hz", d.sample_rate_hz), j.value("window_seconds", d.window_seconds()),
      j.value("hop_seconds", d.hop_seconds()), j.value("frame_seconds", d.frame_seconds()),
      j.value("frame_stride_seconds", d.frame_stride_seconds()),
      j.value("num_mel_bins", d.num_mel_bins));
}

}  // namespace kwsv
