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
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "kwsv/error.hpp"
#include "kwsv/stream_buffer.hpp"
#include "kwsv/stream_config.hpp"

namespace kwsv {

/// i x j matrix of cepstral coefficients, row = mel bin, column = frame,
/// stored row-major. This is also the (height, width) layout the networks
/// consume.
struct Spectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<float> coefficients;
  StreamConfig config;

  float at(std::size_t bin, std::size_t frame) const { return coefficients[bin * frames + frame]; }
  float& at(std::size_t bin, std::size_t frame) { return coefficients[bin * frames + frame]; }
  std::size_t size() const noexcept { return coefficients.size(); }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular mel filterbank over the non-negative FFT bins.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t num_filters, std::size_t fft_size, int sample_rate_hz,
                double low_hz = MfccConstants::kMelLowHz, double high_hz = MfccConstants::kMelHighHz)
      : num_filters_(num_filters), num_bins_(fft_size / 2 + 1) {
    if (high_hz > sample_rate_hz / 2.0) high_hz = sample_rate_hz / 2.0;
    const double mlo = hz_to_mel(low_hz);
    const double mhi = hz_to_mel(high_hz);
    edges_hz_.resize(num_filters + 2);
    for (std::size_t k = 0; k < edges_hz_.size(); ++k)
      edges_hz_[k] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(k) /
                                         static_cast<double>(num_filters + 1));
    weights_.assign(num_filters_ * num_bins_, 0.0);
    const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(fft_size);
    for (std::size_t m = 0; m < num_filters_; ++m) {
      const double lo = edges_hz_[m], c = edges_hz_[m + 1], hi = edges_hz_[m + 2];
      for (std::size_t b = 0; b < num_bins_; ++b) {
        const double f = static_cast<double>(b) * bin_hz;
        double w = 0.0;
        if (f > lo && f <= c)
          w = (f - lo) / (c - lo);
        else if (f > c && f < hi)
          w = (hi - f) / (hi - c);
        weights_[m * num_bins_ + b] = w;
      }
    }
  }

  std::size_t size() const noexcept { return num_filters_; }
  std::size_t num_bins() const noexcept { return num_bins_; }
  /// Filter m spans [edge(m), edge(m+2)] Hz and peaks at edge(m+1).
  double edge_hz(std::size_t k) const { return edges_hz_.at(k); }
  double center_hz(std::size_t m) const { return edges_hz_.at(m + 1); }
  double weight(std::size_t m, std::size_t bin) const { return weights_[m * num_bins_ + bin]; }

  void apply(std::span<const double> power, std::span<double> out) const {
    for (std::size_t m = 0; m < num_filters_; ++m) {
      const double* w = &weights_[m * num_bins_];
      double acc = 0.0;
      for (std::size_t b = 0; b < num_bins_; ++b) acc += w[b] * power[b];
      out[m] = acc;
    }
  }

 private:
  std::size_t num_filters_;
  std::size_t num_bins_;
  std::vector<double> edges_hz_;
  std::vector<double> weights_;
};

namespace detail {

// In-place iterative radix-2 FFT; n must be a power of two.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), twiddle_(n / 2), bitrev_(n) {
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                        static_cast<double>(n));
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
  }

  void transform(std::vector<std::complex<double>>& x) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          const auto t = twiddle_[k * step] * x[i + k + len / 2];
          x[i + k + len / 2] = x[i + k] - t;
          x[i + k] += t;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::size_t> bitrev_;
};

}  // namespace detail

/// MFCC front-end: Hamming window, zero-padded power spectrum, triangular mel
/// filterbank, natural log with floor, orthonormal DCT-II keeping every bin.
///
/// Construction precomputes all tables; `extract` is const and keeps its
/// scratch on the stack, so one extractor may be shared between threads.
class MfccExtractor {
 public:
  explicit MfccExtractor(const StreamConfig& cfg)
      : cfg_(cfg),
        fft_size_(fft_size_for(cfg.frame_samples)),
        fft_(fft_size_),
        filterbank_(cfg.num_mel_bins, fft_size_, cfg.sample_rate_hz) {
    cfg_.validate();
    const std::size_t len = cfg_.frame_samples;
    window_.resize(len);
    for (std::size_t n = 0; n < len; ++n)
      window_[n] = len == 1 ? 1.0
                            : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                                     static_cast<double>(len - 1));
    const std::size_t m = cfg_.num_mel_bins;
    dct_.resize(m * m);
    for (std::size_t k = 0; k < m; ++k) {
      const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(m));
      for (std::size_t n = 0; n < m; ++n)
        dct_[k * m + n] = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                           (2.0 * static_cast<double>(n) + 1.0) /
                                           (2.0 * static_cast<double>(m)));
    }
  }

  const StreamConfig& config() const noexcept { return cfg_; }
  const MelFilterbank& filterbank() const noexcept { return filterbank_; }
  std::size_t fft_size() const noexcept { return fft_size_; }

  /// Linear mel filter energies of one frame (the stage before log and DCT).
  /// `frame` holds frame_samples PCM values.
  std::vector<double> mel_energies(std::span<const std::int16_t> frame) const {
    if (frame.size() != cfg_.frame_samples) throw ShapeError("frame length mismatch");
    std::vector<std::complex<double>> buf(fft_size_);
    for (std::size_t n = 0; n < frame.size(); ++n)
      buf[n] = frame[n] / MfccConstants::kPcmScale * window_[n];
    fft_.transform(buf);
    std::vector<double> power(filterbank_.num_bins());
    for (std::size_t b = 0; b < power.size(); ++b) power[b] = std::norm(buf[b]);
    std::vector<double> energies(filterbank_.size());
    filterbank_.apply(power, energies);
    return energies;
  }

  Spectrogram extract(std::span<const std::int16_t> samples) const {
    if (samples.size() != cfg_.window_samples)
      throw ShapeError("window holds " + std::to_string(samples.size()) + " samples, expected " +
                       std::to_string(cfg_.window_samples));
    Spectrogram out;
    out.bins = cfg_.num_mel_bins;
    out.frames = frame_count(cfg_);
    out.config = cfg_;
    out.coefficients.assign(out.bins * out.frames, 0.0f);
    std::vector<double> logmel(out.bins);
    for (std::size_t t = 0; t < out.frames; ++t) {
      const auto energies =
          mel_energies(samples.subspan(t * cfg_.stride_samples, cfg_.frame_samples));
      for (std::size_t m = 0; m < out.bins; ++m)
        logmel[m] = std::log(std::max(energies[m], MfccConstants::kLogFloor));
      for (std::size_t k = 0; k < out.bins; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < out.bins; ++m) acc += dct_[k * out.bins + m] * logmel[m];
        out.at(k, t) = static_cast<float>(acc);
      }
    }
    return out;
  }

  Spectrogram extract(const AudioWindow& window) const { return extract(window.samples); }

 private:
  StreamConfig cfg_;
  std::size_t fft_size_;
  detail::Fft fft_;
  MelFilterbank filterbank_;
  std::vector<double> window_;
  std::vector<double> dct_;
};

inline Spectrogram extract_mfcc(const AudioWindow& window, const StreamConfig& cfg) {
  return MfccExtractor(cfg).extract(window);
}

}  // namespace kwsv
