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

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>

#include "normbridge/app/config.hpp"
#include "normbridge/middleware/hub.hpp"

namespace nb {

struct WsOptions {
  std::optional<std::filesystem::path> static_dir;  // served under /app
  std::chrono::milliseconds ping_interval{15000};
  /// Unanswered pings after which a connection is dropped.
  int max_missed_pongs = 2;
  int threads = 2;
};

/// WebSocket front end for the hub. Plain HTTP GETs are answered with
/// `/healthz` and, when configured, static files under `/app`.
class WsServer {
 public:
  WsServer(Hub& hub, WsOptions options = {});
  ~WsServer();

  /// Binds and starts accepting. Throws Error when the address is unusable
  /// (for instance, already in use).
  void start(const ListenAddress& address);
  /// Bound port; useful after binding port 0.
  std::uint16_t port() const;
  /// Blocks until `stop`.
  void wait();
  /// Closes the listener and all connections. Thread-safe and idempotent.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nb
