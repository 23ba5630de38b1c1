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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwsv/asv.hpp"
#include "kwsv/memory_budget.hpp"
#include "kwsv/pipeline.hpp"
#include "kwsv/stream_buffer.hpp"

namespace kwsv::service {

/// Client -> server message. Audio arrives as binary frames of 16-bit
/// little-endian PCM; everything else is a JSON text frame:
///
///   {"kind":"open","sample_rate":16000}
///   {"kind":"set_threshold","value":0.85}
///   {"kind":"reset_enrollment"}
///   {"kind":"get_status"}
struct ClientMessage {
  enum class Kind { Open, AudioChunk, SetThreshold, ResetEnrollment, GetStatus };
  Kind kind = Kind::GetStatus;
  std::vector<std::int16_t> pcm;
  double value = 0.0;
  int sample_rate = 0;
};

inline constexpr std::size_t kMaxChunkBytes = 64 * 1024;

class ProtocolError : public Error {
 public:
  using Error::Error;
};

inline ClientMessage parse_binary_frame(std::span<const unsigned char> bytes) {
  if (bytes.size() > kMaxChunkBytes)
    throw ProtocolError("audio chunk of " + std::to_string(bytes.size()) + " bytes exceeds 65536");
  if (bytes.size() % 2 != 0) throw ProtocolError("audio chunk has an odd byte count");
  ClientMessage m;
  m.kind = ClientMessage::Kind::AudioChunk;
  m.pcm.resize(bytes.size() / 2);
  for (std::size_t i = 0; i < m.pcm.size(); ++i)
    m.pcm[i] = static_cast<std::int16_t>(bytes[2 * i] | bytes[2 * i + 1] << 8);
  return m;
}

inline ClientMessage parse_text_frame(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ProtocolError("message must be an object with a string 'kind'");
  const std::string kind = j["kind"];
  ClientMessage m;
  if (kind == "open") {
    m.kind = ClientMessage::Kind::Open;
    if (!j.contains("sample_rate") || !j["sample_rate"].is_number_integer())
      throw ProtocolError("open requires integer 'sample_rate'");
    m.sample_rate = j["sample_rate"];
  } else if (kind == "set_threshold") {
    m.kind = ClientMessage::Kind::SetThreshold;
    if (!j.contains("value") || !j["value"].is_number())
      throw ProtocolError("set_threshold requires numeric 'value'");
    m.value = j["value"];
  } else if (kind == "reset_enrollment") {
    m.kind = ClientMessage::Kind::ResetEnrollment;
  } else if (kind == "get_status") {
    m.kind = ClientMessage::Kind::GetStatus;
  } else if (kind == "audio_chunk") {
    throw ProtocolError("audio_chunk must be sent as a binary frame");
  } else {
    throw ProtocolError("unknown message kind '" + kind + "'");
  }
  return m;
}

inline nlohmann::json error_message(const std::string& what) {
  return {{"kind", "error"}, {"message", what}};
}

/// Transport-independent demo service: one pipeline, one stream buffer, at
/// most one audio producer. Every call runs between windows, so commands
/// never affect a window already in flight.
template <KeywordGate Gate, SpeakerEmbedder Embedder>
class Service {
 public:
  using PipelineT = Pipeline<Gate, Embedder>;

  Service(PipelineT pipeline, std::optional<MemoryBudget> budget = std::nullopt,
          std::string enrollment_path = {})
      : pipeline_(std::move(pipeline)),
        buffer_(pipeline_.config()),
        budget_(std::move(budget)),
        enrollment_path_(std::move(enrollment_path)) {}

  /// Claims the single producer slot. Returns the initial status.
  nlohmann::json open_session(int sample_rate) {
    if (producer_open_) throw ProtocolError("another audio producer is already streaming");
    if (sample_rate != pipeline_.config().sample_rate_hz)
      throw ProtocolError("sample rate " + std::to_string(sample_rate) + " Hz does not match pipeline rate " +
                          std::to_string(pipeline_.config().sample_rate_hz) + " Hz");
    if (!enrollment_path_.empty() && std::filesystem::exists(enrollment_path_)) {
      EnrollmentSet stored = load_enrollment(enrollment_path_);
      if (stored.capacity() == pipeline_.enrollment().capacity()) pipeline_.replace_enrollment(std::move(stored));
    }
    buffer_.reset();
    producer_open_ = true;
    return status();
  }

  void close_session() noexcept { producer_open_ = false; }
  bool session_open() const noexcept { return producer_open_; }

  /// Applies one client message and returns the resulting server messages
  /// in order. Errors are reported as messages; the session stays usable.
  std::vector<nlohmann::json> handle_message(const ClientMessage& msg) {
    std::vector<nlohmann::json> out;
    try {
      switch (msg.kind) {
        case ClientMessage::Kind::Open:
          out.push_back(open_session(msg.sample_rate));
          break;
        case ClientMessage::Kind::AudioChunk: {
          if (!producer_open_) throw ProtocolError("audio received before open");
          const auto windows = buffer_.push_samples(msg.pcm);
          for (const auto& w : windows) {
            const bool was_enrolling = pipeline_.mode() == Mode::Enrolling;
            const PipelineEvent ev = pipeline_.process_window(w);
            nlohmann::json j = to_json(ev);
            j["kind"] = "event";
            out.push_back(std::move(j));
            if (ev.mode == Mode::Enrolling && ev.y == 1) persist();
            if (was_enrolling && pipeline_.mode() == Mode::Inferring) out.push_back(status());
          }
          break;
        }
        case ClientMessage::Kind::SetThreshold:
          pipeline_.set_threshold(static_cast<float>(msg.value));
          persist();
          out.push_back(status());
          break;
        case ClientMessage::Kind::ResetEnrollment:
          pipeline_.reset_enrollment();
          persist();
          out.push_back(status());
          break;
        case ClientMessage::Kind::GetStatus:
          out.push_back(status());
          break;
      }
    } catch (const OverrunError& e) {
      nlohmann::json err = error_message(e.what());
      err["dropped_samples"] = e.dropped();
      out.push_back(std::move(err));
    } catch (const Error& e) {
      out.push_back(error_message(e.what()));
    }
    return out;
  }

  nlohmann::json status() const {
    const auto& set = pipeline_.enrollment();
    nlohmann::json j = {
        {"kind", "status"},
        {"mode", to_string(pipeline_.mode())},
        {"enrolled", set.size()},
        {"n", set.capacity()},
        {"tau", set.threshold()},
        {"session_open", producer_open_},
        {"samples_received", buffer_.samples_received()},
    };
    if (budget_) j["memory"] = {{"total_bytes", budget_->total()}, {"limit_bytes", budget_->limit_bytes}};
    return j;
  }

  std::string export_enrollment() const { return serialize_enrollment(pipeline_.enrollment()); }

  nlohmann::json import_enrollment(std::span<const unsigned char> bytes) {
    EnrollmentSet set = parse_enrollment(bytes);
    if (set.capacity() != pipeline_.enrollment().capacity())
      throw ProtocolError("imported enrollment has n=" + std::to_string(set.capacity()) + ", pipeline uses n=" +
                          std::to_string(pipeline_.enrollment().capacity()));
    pipeline_.replace_enrollment(std::move(set));
    persist();
    return status();
  }

  const PipelineT& pipeline() const noexcept { return pipeline_; }

 private:
  void persist() const {
    if (!enrollment_path_.empty()) save_enrollment(pipeline_.enrollment(), enrollment_path_);
  }

  PipelineT pipeline_;
  StreamBuffer buffer_;
  std::optional<MemoryBudget> budget_;
  std::string enrollment_path_;
  bool producer_open_ = false;
};

}  // namespace kwsv::service
