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

#include <concepts>
#include <cstddef>
#include <optional>
#include <utility>

#include <json.hpp>

#include "kwsv/asv.hpp"
#include "kwsv/ks.hpp"
#include "kwsv/mfcc.hpp"
#include "kwsv/stream_buffer.hpp"

namespace kwsv {

template <class T>
concept KeywordGate = requires(const T& gate, const Spectrogram& s) {
  { gate.classify(s) } -> std::same_as<KsDecision>;
};

template <class T>
concept SpeakerEmbedder = requires(const T& net, const Spectrogram& s) {
  { net.embed(s) } -> std::same_as<DVector>;
};

enum class Mode { Enrolling, Inferring };

inline const char* to_string(Mode m) { return m == Mode::Enrolling ? "enrolling" : "inferring"; }

/// One output of the cascade. x = 0: no keyword (or enrollment window);
/// x = 1: keyword by a non-enrolled speaker; x = 2: keyword by the enrolled
/// speaker.
struct PipelineEvent {
  int x = 0;
  double t = 0.0;
  Mode mode = Mode::Enrolling;
  KsDecision ks;
  int y = 0;                // effective gate after the refractory rule
  bool refractory = false;  // keyword gate suppressed by a recent hit
  std::optional<SvDecision> sv;
  std::optional<EnrollmentProgress> progress;
};

inline nlohmann::json to_json(const PipelineEvent& e) {
  nlohmann::json detail = {
      {"mode", to_string(e.mode)},
      {"ks_class", to_string(e.ks.cls)},
      {"ks_scores", e.ks.scores},
      {"y", e.y},
  };
  if (e.refractory) detail["refractory"] = true;
  if (e.sv) {
    detail["sigma"] = e.sv->sigma;
    detail["z"] = e.sv->z;
    detail["best_index"] = e.sv->best_index;
  }
  if (e.progress) detail["progress"] = {e.progress->filled, e.progress->capacity};
  return {{"t", e.t}, {"x", e.x}, {"detail", std::move(detail)}};
}

inline constexpr std::size_t kDefaultRefractoryHops = 2;

/// The keyword-gated speaker verification cascade.
///
/// Each window goes MFCC -> keyword gate; only gated windows reach the
/// embedder. While fewer than n vectors are enrolled the embedding is added
/// to the enrollment set; afterwards it is scored against the set.
///
/// After a gated window the next `refractory_hops` windows are not gated, so
/// one utterance seen through overlapping windows yields a single event.
template <KeywordGate Gate, SpeakerEmbedder Embedder>
class Pipeline {
 public:
  Pipeline(const StreamConfig& cfg, Gate gate, Embedder embedder, EnrollmentSet enrollment,
           std::size_t refractory_hops = kDefaultRefractoryHops)
      : mfcc_(cfg),
        gate_(std::move(gate)),
        embedder_(std::move(embedder)),
        enrollment_(std::move(enrollment)),
        refractory_hops_(refractory_hops) {
    if (enrollment_.capacity() == 0) throw ConfigError("enrollment capacity n must be positive");
  }

  PipelineEvent process_window(const AudioWindow& window) {
    return process_spectrogram(mfcc_.extract(window), window.start_time);
  }

  PipelineEvent process_spectrogram(const Spectrogram& spec, double t) {
    PipelineEvent ev;
    ev.t = t;
    ev.mode = mode();
    ev.ks = gate_.classify(spec);
    ++windows_;
    if (refractory_remaining_ > 0) {
      --refractory_remaining_;
      ev.refractory = ev.ks.y == 1;
      ev.y = 0;
    } else {
      ev.y = ev.ks.y;
      if (ev.y == 1) refractory_remaining_ = refractory_hops_;
    }
    if (ev.y == 0) {
      ev.x = 0;
      if (ev.mode == Mode::Enrolling) ev.progress = enrollment_.progress();
      return ev;
    }

    ++gated_;
    DVector dv = embedder_.embed(spec);
    ++embeddings_;
    if (ev.mode == Mode::Enrolling) {
      ev.progress = enrollment_.enroll(std::move(dv));
      ev.x = 0;
      return ev;
    }
    ev.sv = sv_decide(dv, enrollment_);
    ev.x = ev.sv->z == 1 ? 2 : 1;
    return ev;
  }

  /// Empties the enrollment set and returns to Enrolling; τ is kept.
  void reset_enrollment() {
    enrollment_.clear();
    refractory_remaining_ = 0;
  }

  void set_threshold(float tau) { enrollment_.set_threshold(tau); }

  Mode mode() const noexcept { return enrollment_.full() ? Mode::Inferring : Mode::Enrolling; }
  const EnrollmentSet& enrollment() const noexcept { return enrollment_; }
  void replace_enrollment(EnrollmentSet set) {
    enrollment_ = std::move(set);
    refractory_remaining_ = 0;
  }
  const StreamConfig& config() const noexcept { return mfcc_.config(); }
  const Gate& gate() const noexcept { return gate_; }
  const Embedder& embedder() const noexcept { return embedder_; }

  std::size_t windows_processed() const noexcept { return windows_; }
  std::size_t gated_windows() const noexcept { return gated_; }
  std::size_t embedder_invocations() const noexcept { return embeddings_; }

 private:
  MfccExtractor mfcc_;
  Gate gate_;
  Embedder embedder_;
  EnrollmentSet enrollment_;
  std::size_t refractory_hops_;
  std::size_t refractory_remaining_ = 0;
  std::size_t windows_ = 0;
  std::size_t gated_ = 0;
  std::size_t embeddings_ = 0;
};

using BundlePipeline = Pipeline<KeywordSpotter, DVectorExtractor>;

}  // namespace kwsv
