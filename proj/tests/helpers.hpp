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

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "normbridge/app/config.hpp"
#include "normbridge/backends/backend.hpp"
#include "normbridge/backends/backend_set.hpp"
#include "normbridge/engine/engine.hpp"
#include "normbridge/engine/executor.hpp"
#include "normbridge/middleware/hub.hpp"
#include "normbridge/middleware/loopback.hpp"

namespace nbt {

inline std::filesystem::path data(const std::string& name) {
  return std::filesystem::path(NB_TEST_DATA) / name;
}

inline nb::Utterance utterance(nb::TurnId id, nb::Role speaker, std::string text,
                               nb::Timestamp at = {}) {
  nb::Utterance u;
  u.id = id;
  u.speaker = speaker;
  u.source_text = std::move(text);
  u.source_lang = speaker == nb::Role::SME ? "en" : "zh";
  u.target_lang = speaker == nb::Role::SME ? "zh" : "en";
  u.received_at = at;
  return u;
}

inline nb::CorrectionBundle bundle(std::string translation) {
  nb::CorrectionBundle b;
  b.translation = std::move(translation);
  b.remediation = "REMEDIATION";
  b.justification = "JUSTIFICATION";
  return b;
}

/// Scripted backend: `fn` computes the outcome, delivered after `delay`.
class FakeBackend : public nb::backends::Backend {
 public:
  using Fn = std::function<nb::backends::Outcome(const nb::backends::BackendRequest&)>;

  explicit FakeBackend(Fn fn, nb::Duration delay = {}) : fn_(std::move(fn)), delay_(delay) {}

  static std::shared_ptr<FakeBackend> text(std::string t, nb::Duration delay = {}) {
    return std::make_shared<FakeBackend>(
        [t](const nb::backends::BackendRequest&) {
          nb::backends::BackendReply r;
          r.text = t;
          return nb::backends::Outcome::ok(r);
        },
        delay);
  }
  static std::shared_ptr<FakeBackend> failing(std::string why = "boom") {
    return std::make_shared<FakeBackend>(
        [why](const nb::backends::BackendRequest&) { return nb::backends::Outcome::fail(why); });
  }

  void invoke(const nb::backends::BackendRequest& request, nb::Executor& exec,
              nb::backends::Completion done) override {
    ++calls;
    last = request;
    if (hang) return;
    exec.post_after(delay_, [done, out = fn_(request)] { done(out); });
  }
  std::string describe() const override { return "fake"; }

  std::atomic<int> calls{0};
  nb::backends::BackendRequest last;
  bool hang = false;

 private:
  Fn fn_;
  nb::Duration delay_;
};

inline nb::AppConfig stub_config() { return nb::load_config(data("stub_config.json")); }

/// Stub backends with no configured delays.
inline nb::AppConfig instant_config() {
  auto cfg = stub_config();
  for (auto& [task, entry] : cfg.backends.items()) entry["primary"].erase("delay_ms");
  return cfg;
}

class Recorder : public nb::EngineObserver {
 public:
  void on_transition(const nb::TransitionRecord& r) override { transitions.push_back(r); }
  void on_rejected(const std::string&, const nb::EngineEvent&, const std::string& why) override {
    rejected.push_back(why);
  }
  void on_turn_completed(const std::string&, const nb::DialogueTurn& t) override {
    turns.push_back(t);
  }
  void on_session_ready(const std::string& s) override { ready.push_back(s); }

  std::vector<nb::TransitionRecord> transitions;
  std::vector<std::string> rejected;
  std::vector<nb::DialogueTurn> turns;
  std::vector<std::string> ready;
};

/// Engine, hub and two registered loopback clients on one virtual executor.
struct Rig {
  explicit Rig(const nb::AppConfig& cfg, std::string session = "s1")
      : Rig(cfg.engine, nb::build_backends(cfg), std::move(session)) {}

  Rig(nb::EngineConfig ec, std::shared_ptr<nb::backends::BackendSet> backends,
      std::string session = "s1")
      : backends(std::move(backends)) {
    engine = std::make_unique<nb::Engine>(
        std::move(ec), this->backends, hub,
        [e = exec](const std::string&) -> std::shared_ptr<nb::Executor> { return e; }, &rec);
    hub.attach(engine.get());
    sme = nb::LoopbackClient::connect(hub, *exec, session, nb::Role::SME);
    fle = nb::LoopbackClient::connect(hub, *exec, session, nb::Role::FLE);
    sme->hello();
    fle->hello();
    exec->run();
  }

  /// Frames of `type` received by `client`.
  static std::vector<nb::wire::WireMessage> of(const nb::LoopbackClient& client,
                                               nb::wire::MessageType type) {
    std::vector<nb::wire::WireMessage> out;
    for (auto& m : client.inbox()) {
      if (m.type == type) out.push_back(m);
    }
    return out;
  }

  std::shared_ptr<nb::VirtualExecutor> exec = std::make_shared<nb::VirtualExecutor>();
  nb::Hub hub;
  Recorder rec;
  std::shared_ptr<nb::backends::BackendSet> backends;
  std::unique_ptr<nb::Engine> engine;
  std::shared_ptr<nb::LoopbackClient> sme;
  std::shared_ptr<nb::LoopbackClient> fle;
};

}  // namespace nbt
