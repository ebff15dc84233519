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

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "normbridge/engine/engine.hpp"
#include "normbridge/middleware/wire.hpp"

namespace nb {

/// A client transport. `send_text` must preserve call order and may be
/// called from any thread; neither it nor `close` may call back into the hub
/// synchronously.
class Connection {
 public:
  virtual ~Connection() = default;
  virtual std::uint64_t id() const = 0;
  virtual void send_text(std::string frame) = 0;
  virtual void close(std::string reason) = 0;
};

/// session_id -> (SME connection, FLE connection).
class ClientRegistry {
 public:
  /// Registers `conn` for the role and returns the connection it displaced.
  std::shared_ptr<Connection> register_client(const std::string& session, Role role,
                                              std::shared_ptr<Connection> conn);
  /// Removes the entry only if it still belongs to `conn_id`.
  bool unregister(const std::string& session, Role role, std::uint64_t conn_id);
  std::shared_ptr<Connection> lookup(const std::string& session, Role role) const;
  bool has_both(const std::string& session) const;
  /// Number of live connections.
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::array<std::shared_ptr<Connection>, 2>> sessions_;
};

struct HubOptions {
  std::size_t offline_queue = 64;
};

/// Routes frames between client connections and the engine. Implements the
/// engine's outbox: outbound frames get per-connection sequence numbers and
/// are queued, bounded, while the target role is offline.
class Hub : public Outbox {
 public:
  explicit Hub(HubOptions options = {});

  void attach(Engine* engine) { engine_ = engine; }

  void on_open(std::shared_ptr<Connection> conn);
  void on_frame(const std::shared_ptr<Connection>& conn, std::string_view frame);
  void on_close(std::uint64_t conn_id);

  DeliveryReceipt send(const std::string& session_id, Role target,
                       wire::WireMessage msg) override;

  const ClientRegistry& registry() const noexcept { return registry_; }
  std::size_t dropped() const noexcept { return dropped_; }
  std::size_t queued(const std::string& session, Role role) const;

 private:
  struct Peer {
    std::shared_ptr<Connection> conn;
    std::optional<std::string> session;
    std::optional<Role> role;
    std::optional<std::uint64_t> last_inbound;
    std::uint64_t next_outbound = 1;
  };

  void reply_error(const std::shared_ptr<Connection>& conn, const std::string& session,
                   std::optional<TurnId> turn, std::string code, std::string message);
  void handle_hello(const std::shared_ptr<Connection>& conn, const wire::WireMessage& m);
  /// Caller holds mu_.
  void transmit(Peer& peer, wire::WireMessage msg);

  HubOptions options_;
  Engine* engine_ = nullptr;
  ClientRegistry registry_;

  mutable std::mutex mu_;
  std::map<std::uint64_t, Peer> peers_;
  std::map<std::pair<std::string, Role>, std::deque<wire::WireMessage>> offline_;
  std::atomic<std::size_t> dropped_{0};
};

}  // namespace nb
