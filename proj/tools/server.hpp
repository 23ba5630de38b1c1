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

// WebSocket/HTTP front for the demo service.
//
//   GET  /stream              WebSocket: JSON text control frames, binary PCM
//   GET  /status              one-shot status JSON
//   GET  /enrollment/export   enrollment file (application/octet-stream)
//   POST /enrollment/import   enrollment file in the body
//   GET  /<anything else>     static file under Options::static_dir
//
// One io thread owns every socket; one worker thread owns the pipeline. They
// talk through a command queue (io -> worker) and posted deliveries
// (worker -> io).

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwsv/service.hpp"

namespace kwsv::server {

/// Type-erased service so the transport is compiled once.
class ServiceHandle {
 public:
  virtual ~ServiceHandle() = default;
  virtual std::vector<nlohmann::json> handle(const service::ClientMessage& m) = 0;
  virtual void close_session() = 0;
  virtual nlohmann::json status() const = 0;
  virtual std::string export_enrollment() const = 0;
  virtual nlohmann::json import_enrollment(std::span<const unsigned char> bytes) = 0;
};

template <KeywordGate G, SpeakerEmbedder E>
class ServiceAdapter final : public ServiceHandle {
 public:
  explicit ServiceAdapter(service::Service<G, E> s) : s_(std::move(s)) {}
  std::vector<nlohmann::json> handle(const service::ClientMessage& m) override { return s_.handle_message(m); }
  void close_session() override { s_.close_session(); }
  nlohmann::json status() const override { return s_.status(); }
  std::string export_enrollment() const override { return s_.export_enrollment(); }
  nlohmann::json import_enrollment(std::span<const unsigned char> bytes) override {
    return s_.import_enrollment(bytes);
  }

 private:
  service::Service<G, E> s_;
};

template <KeywordGate G, SpeakerEmbedder E>
std::unique_ptr<ServiceHandle> make_handle(service::Service<G, E> s) {
  return std::make_unique<ServiceAdapter<G, E>>(std::move(s));
}

struct Options {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  std::string static_dir;
  std::size_t client_queue = 256;  // outgoing messages buffered per client
  std::size_t audio_queue = 64;    // audio chunks waiting for the pipeline
};

class Server {
 public:
  Server(std::unique_ptr<ServiceHandle> service, Options opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the io and worker threads; returns immediately.
  void start();
  void stop();
  /// Blocks until SIGINT or SIGTERM, then stops.
  void wait_for_signal();
  unsigned short port() const;

  struct Impl;  // opaque; the connection classes in server.cpp share it

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace kwsv::server
