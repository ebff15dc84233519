// Copyright 2026 The NormBridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normbridge/middleware/ws_server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <spdlog/spdlog.h>

#include "normbridge/core/error.hpp"

namespace nb {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::atomic<std::uint64_t> next_ws_id{1u << 20};

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

class WsSession;

/// Open WebSocket sessions, so stop() can close them before the io_context goes.
struct LiveSessions {
  std::mutex mu;
  std::map<std::uint64_t, std::weak_ptr<WsSession>> sessions;
};

class WsSession : public Connection, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub, const WsOptions& options,
            std::shared_ptr<LiveSessions> live)
      : live_(std::move(live)),
        id_(next_ws_id++),
        ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        hub_(hub),
        options_(options) {}

  std::uint64_t id() const override { return id_; }

  void send_text(std::string frame) override {
    asio::post(ws_.get_executor(), [self = shared_from_this(), f = std::move(frame)]() mutable {
      if (self->closing_) return;
      self->outq_.push_back(std::move(f));
      if (self->outq_.size() == 1) self->write_next();
    });
  }

  void close(std::string reason) override {
    asio::post(ws_.get_executor(), [self = shared_from_this(), reason = std::move(reason)] {
      self->shutdown(websocket::close_reason(websocket::close_code::policy_error, reason));
    });
  }

  template <class Body, class Allocator>
  void accept(http::request<Body, http::basic_fields<Allocator>> req) {
    ws_.read_message_max(wire::kMaxFrameBytes);
    ws_.set_option(websocket::stream_base::timeout{std::chrono::seconds(30),
                                                   websocket::stream_base::none(), false});
    ws_.control_callback([this](websocket::frame_type kind, beast::string_view) {
      if (kind == websocket::frame_type::pong) missed_ = 0;
    });
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      {
        std::lock_guard lock(self->live_->mu);
        self->live_->sessions[self->id_] = self;
      }
      self->hub_.on_open(self);
      self->read_next();
      self->arm_heartbeat();
    });
  }

  /// Drops the TCP connection; `done` runs on the session's strand afterwards.
  void abort(std::function<void()> done) {
    asio::dispatch(ws_.get_executor(), [self = shared_from_this(), done = std::move(done)] {
      beast::get_lowest_layer(self->ws_).close();
      self->finish();
      done();
    });
  }

 private:
  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      self->missed_ = 0;
      if (!self->ws_.got_text()) {
        self->buffer_.consume(self->buffer_.size());
        self->hub_.on_frame(self, "\x01");  // answered with a protocol error
      } else {
        const auto data = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        self->hub_.on_frame(self, data);
      }
      self->read_next();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outq_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->finish();
                      self->outq_.pop_front();
                      if (!self->outq_.empty()) self->write_next();
                    });
  }

  void arm_heartbeat() {
    timer_.expires_after(options_.ping_interval);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing_) return;
      if (self->missed_ >= self->options_.max_missed_pongs) {
        spdlog::info("connection {}: {} pings unanswered, dropping", self->id_, self->missed_);
        beast::get_lowest_layer(self->ws_).close();
        return self->finish();
      }
      ++self->missed_;
      self->ws_.async_ping({}, [](beast::error_code) {});
      self->arm_heartbeat();
    });
  }

  void shutdown(websocket::close_reason reason) {
    if (closing_) return;
    closing_ = true;
    timer_.cancel();
    ws_.async_close(reason, [self = shared_from_this()](beast::error_code) { self->finish(); });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    closing_ = true;
    timer_.cancel();
    {
      std::lock_guard lock(live_->mu);
      live_->sessions.erase(id_);
    }
    hub_.on_close(id_);
  }

  std::shared_ptr<LiveSessions> live_;
  std::uint64_t id_;
  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outq_;
  Hub& hub_;
  const WsOptions& options_;
  int missed_ = 0;
  bool closing_ = false;
  bool finished_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Hub& hub, const WsOptions& options,
              std::shared_ptr<LiveSessions> live)
      : stream_(std::move(socket)), hub_(hub), options_(options), live_(std::move(live)) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      auto ws = std::make_shared<WsSession>(stream_.release_socket(), hub_, options_, live_);
      ws->accept(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    const std::string target(req_.target());
    if (req_.method() != http::verb::get) {
      res->result(http::status::method_not_allowed);
    } else if (target == "/healthz") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "text/plain");
      res->body() = "ok";
    } else if (!serve_static(target, *res)) {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  bool serve_static(const std::string& target, http::response<http::string_body>& res) {
    if (!options_.static_dir) return false;
    if (target != "/app" && target.rfind("/app/", 0) != 0) return false;
    std::string rel = target.size() > 5 ? target.substr(5) : "";
    if (auto q = rel.find('?'); q != std::string::npos) rel.resize(q);
    if (rel.empty()) rel = "index.html";
    if (rel.find("..") != std::string::npos) return false;
    const auto path = *options_.static_dir / rel;
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream body;
    body << in.rdbuf();
    res.result(http::status::ok);
    res.set(http::field::content_type, std::string(mime_type(path)));
    res.body() = body.str();
    return true;
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Hub& hub_;
  const WsOptions& options_;
  std::shared_ptr<LiveSessions> live_;
};

}  // namespace

struct WsServer::Impl {
  Hub& hub;
  WsOptions options;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::vector<std::thread> threads;
  std::atomic<bool> stopped{false};
  std::mutex wait_mu;
  std::condition_variable wait_cv;
  std::shared_ptr<LiveSessions> live = std::make_shared<LiveSessions>();

  Impl(Hub& h, WsOptions o) : hub(h), options(std::move(o)) {}

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket s) {
      if (ec) {
        if (!acceptor.is_open()) return;
        if (ec != asio::error::operation_aborted) spdlog::warn("accept: {}", ec.message());
      } else {
        std::make_shared<HttpSession>(std::move(s), hub, options, live)->run();
      }
      accept();
    });
  }
};

WsServer::WsServer(Hub& hub, WsOptions options)
    : impl_(std::make_unique<Impl>(hub, std::move(options))) {}

WsServer::~WsServer() { stop(); }

void WsServer::start(const ListenAddress& address) {
  beast::error_code ec;
  const auto ip = asio::ip::make_address(address.host, ec);
  if (ec) throw Error("invalid listen host '" + address.host + "': " + ec.message());
  const tcp::endpoint ep(ip, address.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol(), ec);
  if (!ec) a.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(ep, ec);
  if (!ec) a.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(fmt::format("cannot listen on {}:{}: {}", address.host, address.port,
                            ec.message()));
  }
  impl_->accept();
  for (int i = 0; i < std::max(1, impl_->options.threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->io.run(); });
  }
}

std::uint16_t WsServer::port() const {
  beast::error_code ec;
  return impl_->acceptor.local_endpoint(ec).port();
}

void WsServer::wait() {
  std::unique_lock lock(impl_->wait_mu);
  impl_->wait_cv.wait(lock, [this] { return impl_->stopped.load(); });
}

void WsServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  std::vector<std::shared_ptr<WsSession>> open;
  {
    std::lock_guard lock(impl_->live->mu);
    for (auto& [_, weak] : impl_->live->sessions) {
      if (auto s = weak.lock()) open.push_back(std::move(s));
    }
  }
  if (!impl_->threads.empty()) {
    auto closed = std::make_shared<std::promise<void>>();
    auto remaining = std::make_shared<std::atomic<std::size_t>>(open.size() + 1);
    auto one_done = [closed, remaining] {
      if (--*remaining == 0) closed->set_value();
    };
    asio::post(impl_->io, [this, one_done] {
      beast::error_code ec;
      impl_->acceptor.close(ec);
      one_done();
    });
    for (auto& s : open) s->abort(one_done);
    closed->get_future().wait_for(std::chrono::seconds(2));
  }
  impl_->io.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
  }
  {
    std::lock_guard lock(impl_->wait_mu);
  }
  impl_->wait_cv.notify_all();
}

}  // namespace nb
