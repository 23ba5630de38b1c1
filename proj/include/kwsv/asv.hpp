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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kwsv/bundle.hpp"
#include "kwsv/error.hpp"
#include "kwsv/ks.hpp"
#include "kwsv/mfcc.hpp"

namespace kwsv {

/// Speaker embedding produced by the d-vector network.
struct DVector {
  std::vector<float> values;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const DVector&, const DVector&) = default;
};

inline constexpr float kDefaultThreshold = 0.8f;

struct EnrollmentProgress {
  std::size_t filled = 0;
  std::size_t capacity = 0;
  bool complete() const noexcept { return filled >= capacity; }
  friend bool operator==(const EnrollmentProgress&, const EnrollmentProgress&) = default;
};

/// The enrolled speaker model: up to n d-vectors plus the acceptance threshold.
/// This is the whole of the state learned on-device.
class EnrollmentSet {
 public:
  explicit EnrollmentSet(std::size_t capacity = 16, float threshold = kDefaultThreshold)
      : capacity_(capacity) {
    set_threshold(threshold);
  }

  /// Appends `dv` unchanged. Throws EnrollmentComplete once n vectors are held.
  EnrollmentProgress enroll(DVector dv) {
    if (vectors_.size() >= capacity_)
      throw EnrollmentComplete("enrollment set already holds " + std::to_string(capacity_) +
                               " vectors");
    if (dv.size() == 0) throw ShapeError("empty d-vector");
    if (!vectors_.empty() && dv.size() != dimension())
      throw ShapeError("d-vector has dimension " + std::to_string(dv.size()) + ", set holds " +
                       std::to_string(dimension()));
    vectors_.push_back(std::move(dv));
    return progress();
  }

  void clear() noexcept { vectors_.clear(); }

  void set_threshold(float tau) {
    if (!(tau >= -1.0f && tau <= 1.0f)) throw ConfigError("threshold must lie in [-1, 1]");
    threshold_ = tau;
  }

  float threshold() const noexcept { return threshold_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  bool full() const noexcept { return vectors_.size() >= capacity_; }
  std::size_t dimension() const noexcept { return vectors_.empty() ? 0 : vectors_.front().size(); }
  EnrollmentProgress progress() const noexcept { return {vectors_.size(), capacity_}; }
  const std::vector<DVector>& vectors() const noexcept { return vectors_; }

  /// Floats held by the model: d * |set| plus the threshold.
  std::size_t stored_floats() const noexcept { return dimension() * size() + 1; }

 private:
  std::size_t capacity_;
  float threshold_ = kDefaultThreshold;
  std::vector<DVector> vectors_;
};

/// Cosine similarity, clamped to [-1, 1]. Zero-norm inputs are an error.
inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw ShapeError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw UndefinedSimilarity("cosine similarity with a zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

struct Match {
  double sigma = 0.0;
  std::size_t best_index = 0;
};

/// Best-match score: the largest cosine similarity between the probe and any
/// enrolled vector, with the lowest index winning ties.
inline Match best_match_similarity(const DVector& dv, const EnrollmentSet& set) {
  if (set.empty()) throw Error("best-match similarity against an empty enrollment set");
  Match m{-2.0, 0};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = cosine_similarity(dv.values, set.vectors()[i].values);
    if (s > m.sigma) m = {s, i};
  }
  return m;
}

struct SvDecision {
  int z = 0;  // 1 iff the probe is attributed to the enrolled speaker
  double sigma = 0.0;
  std::size_t best_index = 0;
};

/// Accepts iff sigma > tau (sigma == tau rejects).
inline SvDecision sv_decide(const DVector& dv, const EnrollmentSet& set) {
  const Match m = best_match_similarity(dv, set);
  return {m.sigma > static_cast<double>(set.threshold()) ? 1 : 0, m.sigma, m.best_index};
}

/// Element-wise mean of the enrolled vectors.
inline DVector mean_vector(const EnrollmentSet& set) {
  if (set.empty()) throw Error("mean of an empty enrollment set");
  std::vector<double> acc(set.dimension(), 0.0);
  for (const auto& v : set.vectors())
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v.values[i];
  DVector mean;
  mean.values.resize(acc.size());
  const double n = static_cast<double>(set.size());
  for (std::size_t i = 0; i < acc.size(); ++i) mean.values[i] = static_cast<float>(acc[i] / n);
  return mean;
}

/// Mean-cosine-similarity baseline: cosine against the centroid of the set.
inline double mcs_similarity(const DVector& dv, const EnrollmentSet& set) {
  const DVector mean = mean_vector(set);
  try {
    return cosine_similarity(dv.values, mean.values);
  } catch (const UndefinedSimilarity&) {
    bool probe_zero = std::all_of(dv.values.begin(), dv.values.end(), [](float v) { return v == 0.0f; });
    if (probe_zero) throw;
    throw UndefinedSimilarity("enrollment vectors cancel out: zero-norm mean");
  }
}

inline DVector extract_dvector(const nn::WeightBundle& bundle, const Spectrogram& spec) {
  check_front_end(bundle, spec);
  return DVector{nn::run_network(bundle, to_tensor(spec))};
}

/// d-vector network wrapper.
class DVectorExtractor {
 public:
  explicit DVectorExtractor(nn::WeightBundle bundle) : bundle_(std::move(bundle)) {}
  DVector embed(const Spectrogram& spec) const { return extract_dvector(bundle_, spec); }
  std::size_t dimension() const { return bundle_.output_shape().size(); }
  const nn::WeightBundle& bundle() const noexcept { return bundle_; }

 private:
  nn::WeightBundle bundle_;
};

// Enrollment persistence. Layout, all little-endian:
//   "KWSE" | u32 version | u32 d | u32 n | u32 count | f32 tau | count*d f32
inline constexpr std::uint32_t kEnrollmentFormatVersion = 1;

inline std::string serialize_enrollment(const EnrollmentSet& set) {
  std::string out = "KWSE";
  const auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put(kEnrollmentFormatVersion);
  put(static_cast<std::uint32_t>(set.dimension()));
  put(static_cast<std::uint32_t>(set.capacity()));
  put(static_cast<std::uint32_t>(set.size()));
  put(std::bit_cast<std::uint32_t>(set.threshold()));
  for (const auto& v : set.vectors())
    for (float f : v.values) put(std::bit_cast<std::uint32_t>(f));
  return out;
}

inline EnrollmentSet parse_enrollment(std::span<const unsigned char> bytes) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), "KWSE", 4) != 0)
    throw FormatError("not an enrollment file (bad magic)");
  std::size_t pos = 4;
  const auto get = [&]() {
    const unsigned char* p = bytes.data() + pos;
    pos += 4;
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
  };
  const std::uint32_t version = get();
  if (version != kEnrollmentFormatVersion)
    throw FormatError("unsupported enrollment format version " + std::to_string(version));
  const std::uint32_t d = get(), n = get(), count = get();
  const float tau = std::bit_cast<float>(get());
  if (count > n) throw FormatError("enrollment count exceeds capacity");
  if (count > 0 && d == 0) throw FormatError("enrollment vectors with zero dimension");
  if (bytes.size() != 24 + std::size_t{count} * d * 4)
    throw FormatError("enrollment body size does not match header");
  EnrollmentSet set(n, tau);
  for (std::uint32_t k = 0; k < count; ++k) {
    DVector v;
    v.values.resize(d);
    for (auto& f : v.values) f = std::bit_cast<float>(get());
    set.enroll(std::move(v));
  }
  return set;
}

inline void save_enrollment(const EnrollmentSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const auto bytes = serialize_enrollment(set);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline EnrollmentSet load_enrollment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_enrollment(bytes);
}

}  // namespace kwsv
