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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "normbridge/backends/backend_set.hpp"
#include "normbridge/core/session.hpp"
#include "normbridge/engine/executor.hpp"
#include "normbridge/engine/fsm.hpp"
#include "normbridge/engine/transition_log.hpp"
#include "normbridge/middleware/wire.hpp"

namespace nb {

enum class DeliveryStatus : std::uint8_t { Sent, Queued, Dropped };

struct DeliveryReceipt {
  DeliveryStatus status = DeliveryStatus::Sent;
  std::uint64_t seq = 0;  // outbound seq when sent immediately
};

/// Engine-to-client channel, implemented by the message hub.
class Outbox {
 public:
  virtual ~Outbox() = default;
  virtual DeliveryReceipt send(const std::string& session_id, Role target,
                               wire::WireMessage msg) = 0;
};

/// Hooks for transcripts and instrumentation. Called on the session's
/// executor.
class EngineObserver {
 public:
  virtual ~EngineObserver() = default;
  virtual void on_transition(const TransitionRecord&) {}
  virtual void on_rejected(const std::string& /*session*/, const EngineEvent&,
                           const std::string& /*reason*/) {}
  /// A turn left the pipeline, delivered or not.
  virtual void on_turn_completed(const std::string& /*session*/, const DialogueTurn&) {}
  virtual void on_session_ready(const std::string& /*session*/) {}
};

struct EngineConfig {
  TimeoutPolicy policy;
  LanguagePair langs;
  /// Preceding utterances given to classifiers, impact and generation.
  std::size_t context_turns = 2;
  /// Show the justification for auto-remediated low-impact turns too.
  bool report_low_impact_justification = false;
};

class Engine;

/// Runtime for one two-party session. All methods other than the
/// thread-safe `submit`/`speech`/`choice` must run on the session executor.
class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(std::string id, Engine& engine, std::shared_ptr<Executor> exec);

  const std::string& id() const noexcept { return state_.session_id; }
  Executor& executor() noexcept { return *exec_; }

  /// Queues an event for processing on the session executor.
  void submit(EngineEvent event);
  void speech(Role speaker, std::string text, std::optional<std::string> audio_ref);
  void choice(Role from, TurnId turn, SenderChoice c);
  /// Applies to turns spoken after the call.
  void set_languages(LanguagePair langs);

  /// Processes one event now. Executor thread only.
  void dispatch(EngineEvent event);

  const SessionState& state() const noexcept { return state_; }
  const std::vector<LatencyRecord>& latencies() const noexcept { return latencies_; }

 private:
  void run(const Action& action, const DialogueTurn& turn);
  void start_stage(Stage stage, const DialogueTurn& turn);
  void run_generation(const DialogueTurn& turn);
  void send(Role target, wire::WireMessage msg);
  std::vector<Utterance> preceding() const;
  void fail(TurnId id, std::string message);

  Engine& engine_;
  std::shared_ptr<Executor> exec_;
  SessionState state_;
  TurnId next_turn_ = 1;
  std::optional<Executor::TimerId> choice_timer_;
  std::vector<LatencyRecord> latencies_;
};

/// Owns sessions and routes inbound messages to them.
class Engine {
 public:
  using ExecutorFactory = std::function<std::shared_ptr<Executor>(const std::string&)>;

  Engine(EngineConfig config, std::shared_ptr<backends::BackendSet> backends,
         Outbox& outbox, ExecutorFactory executors, EngineObserver* observer = nullptr);

  /// Returns the session, creating it on first use.
  std::shared_ptr<Session> session(const std::string& id);
  std::shared_ptr<Session> find(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  void on_session_ready(const std::string& session_id);
  void on_speech(const std::string& session_id, Role speaker, std::string text,
                 std::optional<std::string> audio_ref = std::nullopt);
  void on_choice(const std::string& session_id, Role from, TurnId turn, SenderChoice c);

  const EngineConfig& config() const noexcept { return config_; }
  backends::BackendSet& backends() noexcept { return *backends_; }
  Outbox& outbox() noexcept { return outbox_; }
  EngineObserver* observer() noexcept { return observer_; }

 private:
  EngineConfig config_;
  std::shared_ptr<backends::BackendSet> backends_;
  Outbox& outbox_;
  ExecutorFactory executors_;
  EngineObserver* observer_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace nb
