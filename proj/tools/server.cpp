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

#include "server.hpp"

#include <condition_variable>
#include <csignal>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace kwsv::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using service::ClientMessage;

namespace {

using Payload = std::shared_ptr<const std::string>;

Payload payload(const nlohmann::json& j) { return std::make_shared<const std::string>(j.dump()); }

std::string mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

}  // namespace

class WsSession;

struct Server::Impl {
  Impl(std::unique_ptr<ServiceHandle> s, Options o) : service(std::move(s)), opts(std::move(o)) {}

  std::unique_ptr<ServiceHandle> service;
  mutable std::mutex service_mu;
  Options opts;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread worker;
  bool running = false;

  // io -> worker
  struct Command {
    std::uint64_t session = 0;
    bool closed = false;  // session went away
    ClientMessage msg;
  };
  std::mutex q_mu;
  std::condition_variable q_cv;
  std::deque<Command> queue;
  std::size_t queued_audio = 0;
  bool stopping = false;

  // io thread only
  std::map<std::uint64_t, std::weak_ptr<WsSession>> sessions;
  std::uint64_t next_id = 1;

  // worker thread only
  std::optional<std::uint64_t> producer;

  void do_accept();
  void on_client_frame(std::uint64_t id, bool text, const std::string& data);
  void on_client_closed(std::uint64_t id);
  void deliver(std::uint64_t target, Payload p);  // target 0 = everyone
  void post_to(std::uint64_t target, const nlohmann::json& j) {
    net::post(ioc, [this, target, p = payload(j)] { deliver(target, p); });
  }
  void enqueue(Command c);
  void worker_loop();
  void run_command(const Command& c);
  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);
};

// ---------------------------------------------------------------------------
// WebSocket client

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Server::Impl& srv, std::uint64_t id)
      : ws_(std::move(socket)), srv_(srv), id_(id) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 20);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->srv_.sessions[self->id_] = self;
      self->do_read();
    });
  }

  // Queues one text message. When the client lags, the oldest unsent message
  // is dropped and a gap notice goes out in its place.
  void send(Payload p) {
    if (out_.size() >= srv_.opts.client_queue && out_.size() > 1) {
      out_.erase(out_.begin() + 1);
      ++gap_;
    }
    out_.push_back(std::move(p));
    if (out_.size() == 1) do_write();
  }

 private:
  void do_read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      srv_.on_client_closed(id_);
      return;
    }
    const std::string data = beast::buffers_to_string(buf_.data());
    buf_.consume(buf_.size());
    srv_.on_client_frame(id_, ws_.got_text(), data);
    do_read();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*out_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    if (ec) {
      out_.clear();
      return;
    }
    out_.pop_front();
    if (gap_ > 0) {
      out_.push_front(payload({{"kind", "gap"}, {"dropped_messages", gap_}}));
      gap_ = 0;
    }
    if (!out_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  std::deque<Payload> out_;
  std::size_t gap_ = 0;
  Server::Impl& srv_;
  std::uint64_t id_;
};

// ---------------------------------------------------------------------------
// Plain HTTP, upgrading to WebSocket on /stream

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Server::Impl& srv) : stream_(std::move(socket)), srv_(srv) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/stream") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), srv_, srv_.next_id++)->run(std::move(req_));
        return;
      }
    }
    auto res = std::make_shared<http::response<http::string_body>>(srv_.handle_http(req_));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec2, std::size_t) {
      if (ec2 || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  Server::Impl& srv_;
};

// ---------------------------------------------------------------------------

void Server::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (!ec) std::make_shared<HttpSession>(std::move(socket), *this)->run();
    if (acceptor.is_open()) do_accept();
  });
}

void Server::Impl::deliver(std::uint64_t target, Payload p) {
  for (auto it = sessions.begin(); it != sessions.end();) {
    auto s = it->second.lock();
    if (!s) {
      it = sessions.erase(it);
      continue;
    }
    if (target == 0 || target == it->first) s->send(p);
    ++it;
  }
}

void Server::Impl::on_client_frame(std::uint64_t id, bool text, const std::string& data) {
  Command c;
  c.session = id;
  try {
    c.msg = text ? service::parse_text_frame(data)
                 : service::parse_binary_frame({reinterpret_cast<const unsigned char*>(data.data()), data.size()});
  } catch (const Error& e) {
    deliver(id, payload(service::error_message(e.what())));
    return;
  }
  if (c.msg.kind == ClientMessage::Kind::AudioChunk) {
    std::lock_guard lk(q_mu);
    if (queued_audio >= opts.audio_queue) {
      // Backpressure: the pipeline is behind real time. Say so; never drop
      // silently.
      nlohmann::json err = service::error_message("audio queue full; chunk dropped");
      err["dropped_samples"] = c.msg.pcm.size();
      deliver(id, payload(err));
      return;
    }
  }
  enqueue(std::move(c));
}

void Server::Impl::on_client_closed(std::uint64_t id) {
  sessions.erase(id);
  Command c;
  c.session = id;
  c.closed = true;
  enqueue(std::move(c));
}

void Server::Impl::enqueue(Command c) {
  {
    std::lock_guard lk(q_mu);
    if (!c.closed && c.msg.kind == ClientMessage::Kind::AudioChunk) ++queued_audio;
    queue.push_back(std::move(c));
  }
  q_cv.notify_one();
}

void Server::Impl::worker_loop() {
  for (;;) {
    Command c;
    {
      std::unique_lock lk(q_mu);
      q_cv.wait(lk, [this] { return stopping || !queue.empty(); });
      if (stopping) return;
      c = std::move(queue.front());
      queue.pop_front();
      if (!c.closed && c.msg.kind == ClientMessage::Kind::AudioChunk) --queued_audio;
    }
    run_command(c);
  }
}

void Server::Impl::run_command(const Command& c) {
  std::lock_guard lk(service_mu);
  if (c.closed) {
    if (producer == c.session) {
      service->close_session();
      producer.reset();
    }
    return;
  }
  using K = ClientMessage::Kind;
  if (c.msg.kind == K::AudioChunk && producer != c.session) {
    post_to(c.session, service::error_message(producer ? "another client is the audio producer"
                                                       : "audio received before open"));
    return;
  }
  const auto out = service->handle(c.msg);
  for (const auto& m : out) {
    const std::string kind = m.value("kind", "");
    if (kind == "error") {
      post_to(c.session, m);
    } else if (kind == "event") {
      post_to(0, m);
    } else if (c.msg.kind == K::Open) {
      producer = c.session;
      post_to(0, m);
    } else if (c.msg.kind == K::GetStatus) {
      post_to(c.session, m);
    } else {
      post_to(0, m);  // state changed: every viewer reconciles
    }
  }
}

http::response<http::string_body> Server::Impl::handle_http(const http::request<http::string_body>& req) {
  http::response<http::string_body> res;
  res.version(req.version());
  res.keep_alive(req.keep_alive());
  res.set(http::field::server, "kwsv");
  const auto reply = [&](http::status st, const std::string& type, std::string body) {
    res.result(st);
    res.set(http::field::content_type, type);
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  const auto json_reply = [&](http::status st, const nlohmann::json& j) {
    return reply(st, "application/json", j.dump());
  };

  std::string target(req.target());
  if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);

  try {
    if (target == "/status") {
      if (req.method() != http::verb::get) return json_reply(http::status::method_not_allowed, service::error_message("GET only"));
      std::lock_guard lk(service_mu);
      return json_reply(http::status::ok, service->status());
    }
    if (target == "/enrollment/export") {
      if (req.method() != http::verb::get) return json_reply(http::status::method_not_allowed, service::error_message("GET only"));
      std::lock_guard lk(service_mu);
      return reply(http::status::ok, "application/octet-stream", service->export_enrollment());
    }
    if (target == "/enrollment/import") {
      if (req.method() != http::verb::post) return json_reply(http::status::method_not_allowed, service::error_message("POST only"));
      const auto& body = req.body();
      nlohmann::json st;
      {
        std::lock_guard lk(service_mu);
        st = service->import_enrollment({reinterpret_cast<const unsigned char*>(body.data()), body.size()});
      }
      deliver(0, payload(st));
      return json_reply(http::status::ok, st);
    }
    if (target == "/stream")
      return json_reply(http::status::bad_request, service::error_message("/stream requires a WebSocket upgrade"));
  } catch (const Error& e) {
    return json_reply(http::status::bad_request, service::error_message(e.what()));
  }

  if (req.method() != http::verb::get || opts.static_dir.empty() || target.find("..") != std::string::npos)
    return json_reply(http::status::not_found, service::error_message("not found"));
  std::filesystem::path p = std::filesystem::path(opts.static_dir) / target.substr(1);
  if (target == "/" || std::filesystem::is_directory(p)) p /= "index.html";
  std::ifstream in(p, std::ios::binary);
  if (!in) return json_reply(http::status::not_found, service::error_message("not found"));
  std::ostringstream body;
  body << in.rdbuf();
  return reply(http::status::ok, mime_type(p), body.str());
}

// ---------------------------------------------------------------------------

Server::Server(std::unique_ptr<ServiceHandle> service, Options opts)
    : impl_(std::make_unique<Impl>(std::move(service), std::move(opts))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running) return;
  const tcp::endpoint ep(net::ip::make_address(impl_->opts.address), impl_->opts.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol());
  a.set_option(net::socket_base::reuse_address(true));
  a.bind(ep);
  a.listen(net::socket_base::max_listen_connections);
  impl_->do_accept();
  impl_->running = true;
  impl_->worker = std::thread([this] { impl_->worker_loop(); });
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->running) return;
  {
    std::lock_guard lk(impl_->q_mu);
    impl_->stopping = true;
  }
  impl_->q_cv.notify_all();
  impl_->worker.join();
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->ioc.stop();
  impl_->io_thread.join();
  impl_->running = false;
}

void Server::wait_for_signal() {
  net::io_context sig_ioc;
  net::signal_set signals(sig_ioc, SIGINT, SIGTERM);
  signals.async_wait([](const beast::error_code&, int) {});
  sig_ioc.run();
  stop();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace kwsv::server
