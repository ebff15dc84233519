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

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "normbridge/engine/executor.hpp"
#include "normbridge/middleware/hub.hpp"

namespace nb {

/// In-process client for replays and tests. Frames from the hub are decoded
/// into `inbox()` immediately; the optional handler runs later on the
/// executor.
class LoopbackClient : public Connection, public std::enable_shared_from_this<LoopbackClient> {
 public:
  using Handler = std::function<void(const wire::WireMessage&)>;

  static std::shared_ptr<LoopbackClient> connect(Hub& hub, Executor& exec,
                                                 std::string session, Role role);

  LoopbackClient(std::uint64_t id, Hub& hub, Executor& exec, std::string session, Role role);

  std::uint64_t id() const override { return id_; }
  void send_text(std::string frame) override;
  void close(std::string reason) override;

  void on_message(Handler h) { handler_ = std::move(h); }

  /// Client-to-hub; stamps the next client seq.
  void send(wire::WireMessage msg);
  void hello();
  void say(std::string text);
  void choose(TurnId turn, SenderChoice c);
  void disconnect();

  Role role() const noexcept { return role_; }
  const std::string& session() const noexcept { return session_; }
  std::vector<wire::WireMessage> inbox() const;
  std::vector<std::string> raw_frames() const;
  bool closed() const;

 private:
  std::uint64_t id_;
  Hub& hub_;
  Executor& exec_;
  std::string session_;
  Role role_;
  std::uint64_t next_seq_ = 1;
  Handler handler_;

  mutable std::mutex mu_;
  std::vector<std::string> frames_;
  std::vector<wire::WireMessage> inbox_;
  bool closed_ = false;
};

}  // namespace nb
