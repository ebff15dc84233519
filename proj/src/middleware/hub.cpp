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

#include "normbridge/middleware/hub.hpp"

#include <spdlog/spdlog.h>

#include "normbridge/core/error.hpp"

namespace nb {

namespace {

std::size_t slot(Role r) { return r == Role::SME ? 0 : 1; }

// Error frames need a session id even before a client said hello.
constexpr const char* kNoSession = "-";

}  // namespace

std::shared_ptr<Connection> ClientRegistry::register_client(const std::string& session,
                                                            Role role,
                                                            std::shared_ptr<Connection> conn) {
  std::unique_lock lock(mu_);
  auto& entry = sessions_[session][slot(role)];
  auto previous = std::move(entry);
  entry = std::move(conn);
  return previous;
}

bool ClientRegistry::unregister(const std::string& session, Role role,
                                std::uint64_t conn_id) {
  std::unique_lock lock(mu_);
  auto it = sessions_.find(session);
  if (it == sessions_.end()) return false;
  auto& entry = it->second[slot(role)];
  if (!entry || entry->id() != conn_id) return false;
  entry.reset();
  return true;
}

std::shared_ptr<Connection> ClientRegistry::lookup(const std::string& session,
                                                   Role role) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session);
  return it == sessions_.end() ? nullptr : it->second[slot(role)];
}

bool ClientRegistry::has_both(const std::string& session) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session);
  return it != sessions_.end() && it->second[0] && it->second[1];
}

std::size_t ClientRegistry::size() const {
  std::shared_lock lock(mu_);
  std::size_t n = 0;
  for (const auto& [_, conns] : sessions_) {
    n += (conns[0] ? 1 : 0) + (conns[1] ? 1 : 0);
  }
  return n;
}

Hub::Hub(HubOptions options) : options_(options) {}

void Hub::on_open(std::shared_ptr<Connection> conn) {
  std::lock_guard lock(mu_);
  const auto id = conn->id();
  peers_[id].conn = std::move(conn);
}

void Hub::on_close(std::uint64_t conn_id) {
  std::lock_guard lock(mu_);
  auto it = peers_.find(conn_id);
  if (it == peers_.end()) return;
  if (it->second.session && it->second.role &&
      registry_.unregister(*it->second.session, *it->second.role, conn_id)) {
    spdlog::info("[{}] {} disconnected", *it->second.session, to_string(*it->second.role));
  }
  peers_.erase(it);
}

void Hub::transmit(Peer& peer, wire::WireMessage msg) {
  msg.seq = peer.next_outbound++;
  peer.conn->send_text(wire::encode(msg));
}

void Hub::reply_error(const std::shared_ptr<Connection>& conn, const std::string& session,
                      std::optional<TurnId> turn, std::string code, std::string message) {
  std::lock_guard lock(mu_);
  auto it = peers_.find(conn->id());
  if (it == peers_.end()) return;
  const std::string& sid = session.empty() ? it->second.session.value_or(kNoSession) : session;
  transmit(it->second, wire::error(sid, turn, std::move(code), std::move(message)));
}

void Hub::handle_hello(const std::shared_ptr<Connection>& conn, const wire::WireMessage& m) {
  const Role role = *m.identity;
  bool ready = false;
  {
    std::lock_guard lock(mu_);
    auto& peer = peers_[conn->id()];
    if (peer.session && (*peer.session != m.session_id || *peer.role != role)) {
      registry_.unregister(*peer.session, *peer.role, conn->id());
    }
    const bool had_both = registry_.has_both(m.session_id);
    auto previous = registry_.register_client(m.session_id, role, conn);
    peer.session = m.session_id;
    peer.role = role;
    if (previous && previous->id() != conn->id()) {
      spdlog::warn("[{}] {} reconnected; closing connection {}", m.session_id,
                   to_string(role), previous->id());
      auto old = peers_.find(previous->id());
      if (old != peers_.end()) {
        transmit(old->second, wire::error(m.session_id, std::nullopt, "replaced",
                                          "another client took over this role"));
        old->second.session.reset();
        old->second.role.reset();
      }
      previous->close("replaced");
    }
    transmit(peer, wire::ack(m.session_id, std::nullopt,
                             {{"registered", std::string(to_string(role))},
                              {"v", wire::kProtocolVersion}}));
    auto q = offline_.find({m.session_id, role});
    if (q != offline_.end()) {
      for (auto& msg : q->second) transmit(peer, std::move(msg));
      offline_.erase(q);
    }
    ready = !had_both && registry_.has_both(m.session_id);
  }
  spdlog::info("[{}] {} connected", m.session_id, to_string(role));
  if (engine_) {
    engine_->session(m.session_id);
    if (ready) engine_->on_session_ready(m.session_id);
  }
}

void Hub::on_frame(const std::shared_ptr<Connection>& conn, std::string_view frame) {
  wire::WireMessage m;
  try {
    m = wire::decode(frame);
  } catch (const ProtocolError& e) {
    spdlog::debug("connection {}: rejected frame: {}", conn->id(), e.what());
    reply_error(conn, {}, std::nullopt, "protocol", e.what());
    return;
  }

  std::optional<std::string> session;
  std::optional<Role> role;
  {
    std::lock_guard lock(mu_);
    auto& peer = peers_[conn->id()];
    if (!peer.conn) peer.conn = conn;
    if (peer.last_inbound && m.seq <= *peer.last_inbound) {
      auto msg = fmt::format("seq {} does not follow {}", m.seq, *peer.last_inbound);
      transmit(peer, wire::error(peer.session.value_or(m.session_id), std::nullopt,
                                 "out_of_order", msg));
      return;
    }
    peer.last_inbound = m.seq;
    session = peer.session;
    role = peer.role;
  }

  if (m.type == wire::MessageType::hello) {
    handle_hello(conn, m);
    return;
  }
  if (!session || !role) {
    reply_error(conn, m.session_id, std::nullopt, "not_registered", "send hello first");
    return;
  }
  if (m.session_id != *session || (m.identity && *m.identity != *role)) {
    reply_error(conn, *session, std::nullopt, "identity_mismatch",
                "frame does not match the registered session and role");
    return;
  }
  if (m.type != wire::MessageType::speech && m.type != wire::MessageType::choice &&
      m.type != wire::MessageType::ack) {
    reply_error(conn, *session, std::nullopt, "unexpected",
                fmt::format("clients may not send `{}` frames", wire::to_string(m.type)));
    return;
  }
  if (!engine_) return;

  switch (m.type) {
    case wire::MessageType::speech: {
      std::string text = m.body.value("text", std::string{});
      std::optional<std::string> audio;
      if (m.body.contains("audio_ref")) audio = m.body["audio_ref"].get<std::string>();
      engine_->on_speech(*session, *role, std::move(text), std::move(audio));
      break;
    }
    case wire::MessageType::choice: {
      const auto turn = parse_turn_id(*m.turn_id);
      const auto c = parse_sender_choice(m.body["choice"].get<std::string>());
      engine_->on_choice(*session, *role, *turn, *c);
      break;
    }
    default:
      break;
  }
}

DeliveryReceipt Hub::send(const std::string& session_id, Role target, wire::WireMessage msg) {
  std::lock_guard lock(mu_);
  if (auto conn = registry_.lookup(session_id, target)) {
    auto it = peers_.find(conn->id());
    if (it != peers_.end()) {
      const auto seq = it->second.next_outbound;
      transmit(it->second, std::move(msg));
      return {DeliveryStatus::Sent, seq};
    }
  }
  auto& q = offline_[{session_id, target}];
  q.push_back(std::move(msg));
  if (q.size() > options_.offline_queue) {
    const auto& oldest = q.front();
    spdlog::warn("[{}] offline queue for {} full; dropping oldest `{}` frame", session_id,
                 to_string(target), wire::to_string(oldest.type));
    q.pop_front();
    ++dropped_;
  }
  return {DeliveryStatus::Queued, 0};
}

std::size_t Hub::queued(const std::string& session, Role role) const {
  std::lock_guard lock(mu_);
  auto it = offline_.find({session, role});
  return it == offline_.end() ? 0 : it->second.size();
}

}  // namespace nb
