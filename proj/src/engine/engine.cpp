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

#include "normbridge/engine/engine.hpp"

#include <spdlog/spdlog.h>

#include "normbridge/core/error.hpp"

namespace nb {

using nlohmann::json;

namespace {

wire::WireMessage outbound(wire::MessageType type, const std::string& session,
                           const DialogueTurn& turn, json body) {
  wire::WireMessage m;
  m.type = type;
  m.session_id = session;
  m.turn_id = format_turn_id(turn.id());
  m.identity = turn.sender();
  m.body = std::move(body);
  return m;
}

}  // namespace

Session::Session(std::string id, Engine& engine, std::shared_ptr<Executor> exec)
    : engine_(engine), exec_(std::move(exec)) {
  state_.session_id = std::move(id);
  state_.langs = engine.config().langs;
}

void Session::submit(EngineEvent event) {
  exec_->post([self = shared_from_this(), event = std::move(event)]() mutable {
    self->dispatch(std::move(event));
  });
}

void Session::speech(Role speaker, std::string text, std::optional<std::string> audio_ref) {
  exec_->post([self = shared_from_this(), speaker, text = std::move(text),
               audio_ref = std::move(audio_ref)]() mutable {
    Utterance u;
    u.id = self->next_turn_;
    u.speaker = speaker;
    u.source_text = std::move(text);
    u.source_lang = self->state_.langs.lang(speaker);
    u.target_lang = self->state_.langs.lang(peer_of(speaker));
    u.received_at = self->exec_->now();
    u.audio_ref = std::move(audio_ref);
    const bool idle = self->state_.fsm_state == EngineState::Idle;
    self->dispatch(EngineEvent::speech(self->id(), std::move(u)));
    if (idle) ++self->next_turn_;
  });
}

void Session::choice(Role from, TurnId turn, SenderChoice c) {
  exec_->post([self = shared_from_this(), from, turn, c] {
    const auto& pending = self->state_.pending;
    if (pending && pending->id() == turn && pending->sender() != from) {
      self->send(from, wire::error(self->id(), turn, "not_sender",
                                   "only the speaker of a turn may choose its delivery"));
      return;
    }
    self->dispatch(EngineEvent::chosen(self->id(), turn, c));
  });
}

void Session::set_languages(LanguagePair langs) {
  exec_->post([self = shared_from_this(), langs = std::move(langs)]() mutable {
    self->state_.langs = std::move(langs);
  });
}

std::vector<Utterance> Session::preceding() const {
  const std::size_t n = std::min(engine_.config().context_turns, state_.history.size());
  std::vector<Utterance> out;
  for (auto it = state_.history.end() - static_cast<std::ptrdiff_t>(n);
       it != state_.history.end(); ++it) {
    out.push_back(it->utterance);
  }
  return out;
}

void Session::send(Role target, wire::WireMessage msg) {
  engine_.outbox().send(id(), target, std::move(msg));
}

void Session::fail(TurnId id, std::string message) {
  dispatch(EngineEvent::failure(this->id(), id, std::move(message)));
}

void Session::dispatch(EngineEvent event) {
  event.at = exec_->now();
  if (event.kind == EventKind::SpeechReceived && event.utterance) {
    event.utterance->received_at = event.at;
  }
  static const DialogueTurn kNoTurn{};
  const DialogueTurn& turn = state_.pending ? *state_.pending : kNoTurn;
  Step step = advance(state_.fsm_state, event, turn, engine_.config().policy);

  if (!step.accepted()) {
    spdlog::debug("[{}] dropped {}", id(), *step.rejected);
    if (auto* obs = engine_.observer()) obs->on_rejected(id(), event, *step.rejected);
    if (event.kind == EventKind::SpeechReceived && event.utterance) {
      send(event.utterance->speaker,
           wire::error(id(), std::nullopt, "busy", "a turn is already in progress"));
    } else if (event.kind == EventKind::ChoiceReceived && state_.pending) {
      send(state_.pending->sender(),
           wire::error(id(), event.turn_id, "stale_choice", *step.rejected));
    }
    return;
  }

  const EngineState from = state_.fsm_state;
  state_.fsm_state = step.next;
  state_.pending = step.turn;

  if (auto* obs = engine_.observer()) {
    obs->on_transition({id(), step.turn.id(), from, event.kind, step.next,
                        event.at - step.turn.utterance.received_at});
  }
  if (step.next == EngineState::Delivering && !step.turn.error_notice) {
    latencies_.push_back(record_latency(step.turn));
  }

  for (const auto& action : step.actions) run(action, step.turn);

  if (step.next == EngineState::Delivering || step.next == EngineState::Faulted) {
    submit(EngineEvent::acked(id(), step.turn.id()));
  }
}

void Session::run(const Action& action, const DialogueTurn& turn) {
  std::visit(
      [&](const auto& a) {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, InvokeStage>) {
          start_stage(a.stage, turn);
        } else if constexpr (std::is_same_v<A, Notify>) {
          switch (a.kind) {
            case NoticeKind::Transcript:
              send(a.target, outbound(wire::MessageType::transcript, id(), turn,
                                      {{"text", a.text}}));
              break;
            case NoticeKind::Translation:
              send(a.target, outbound(wire::MessageType::translation, id(), turn,
                                      {{"text", a.text},
                                       {"source_text", turn.utterance.source_text}}));
              break;
            case NoticeKind::DeliveryReport: {
              json body{{"delivered", a.text == "Remediation" ? "remediation" : "translation"},
                        {"text", turn.delivered_text.value_or("")}};
              if (turn.sender_choice) {
                body["sender_choice"] = std::string(to_string(*turn.sender_choice));
              }
              if (turn.bundle && !turn.sender_choice) {
                // Low-impact auto-remediation: the justification is logged and
                // only shown when configured.
                spdlog::info("[{}] {} auto-remediated: {}", id(),
                             format_turn_id(turn.id()), turn.bundle->justification);
                if (engine_.config().report_low_impact_justification) {
                  body["justification"] = turn.bundle->justification;
                }
              }
              send(a.target, outbound(wire::MessageType::ack, id(), turn, std::move(body)));
              break;
            }
            case NoticeKind::Error:
              send(a.target, wire::error(id(), turn.id(), "backend_error", a.text));
              break;
          }
        } else if constexpr (std::is_same_v<A, Deliver>) {
          send(a.target, outbound(wire::MessageType::deliver, id(), turn, {{"text", a.text}}));
        } else if constexpr (std::is_same_v<A, PromptSender>) {
          json body{{"translation", a.translation},
                    {"remediation", a.remediation},
                    {"justification", a.justification},
                    {"timeout_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                       engine_.config().policy.timeout)
                                       .count()}};
          if (turn.analysis) body["category"] = turn.analysis->category.name;
          send(a.target, outbound(wire::MessageType::correction_prompt, id(), turn,
                                  std::move(body)));
        } else if constexpr (std::is_same_v<A, StartChoiceTimer>) {
          const TurnId tid = turn.id();
          choice_timer_ = exec_->post_after(
              engine_.config().policy.timeout, [self = shared_from_this(), tid] {
                self->choice_timer_.reset();
                self->dispatch(EngineEvent::timeout(self->id(), tid));
              });
        } else if constexpr (std::is_same_v<A, CancelChoiceTimer>) {
          if (choice_timer_) exec_->cancel(*choice_timer_);
          choice_timer_.reset();
        } else if constexpr (std::is_same_v<A, AppendHistory>) {
          state_ = append_turn(std::move(state_), turn);
          if (auto* obs = engine_.observer()) obs->on_turn_completed(id(), turn);
        } else if constexpr (std::is_same_v<A, DiscardTurn>) {
          state_.pending.reset();
          if (auto* obs = engine_.observer()) obs->on_turn_completed(id(), turn);
        }
      },
      action);
}

void Session::start_stage(Stage stage, const DialogueTurn& turn) {
  auto self = shared_from_this();
  const TurnId tid = turn.id();
  auto& be = engine_.backends();
  switch (stage) {
    case Stage::Transcribe:
      be.transcribe(turn.utterance, *exec_, [self, tid](backends::Result<backends::TextOutcome> r) {
        if (!r.ok()) return self->fail(tid, r.error);
        self->dispatch(EngineEvent::transcript(self->id(), tid, std::move(r.value->text)));
      });
      break;
    case Stage::Translate:
      be.translate(turn.utterance, *exec_, [self, tid](backends::Result<backends::TextOutcome> r) {
        if (!r.ok()) return self->fail(tid, r.error);
        self->dispatch(EngineEvent::translation(self->id(), tid, std::move(r.value->text)));
      });
      break;
    case Stage::Analyze: {
      const auto context = preceding();
      const Utterance current = turn.utterance;
      be.classify_category(
          context, current, *exec_,
          [self, tid, context, current](backends::Result<backends::CategoryOutcome> cat) {
            if (!cat.ok()) return self->fail(tid, cat.error);
            const NormCategory category = cat.value->category;
            self->engine_.backends().detect_violation(
                context, current, category, *self->exec_,
                [self, tid, category](backends::Result<backends::ViolationOutcome> v) {
                  if (!v.ok()) return self->fail(tid, v.error);
                  self->dispatch(EngineEvent::analyzed(self->id(), tid,
                                                       NormAnalysis{category, v.value->violated, {}}));
                });
          });
      break;
    }
    case Stage::Generate:
      run_generation(turn);
      break;
  }
}

void Session::run_generation(const DialogueTurn& turn) {
  struct Join {
    std::optional<Impact> impact;
    std::optional<backends::TextOutcome> remediation;
    std::optional<backends::TextOutcome> justification;
    bool failed = false;
  };
  auto join = std::make_shared<Join>();
  auto self = shared_from_this();
  const TurnId tid = turn.id();
  const Utterance current = turn.utterance;
  const NormCategory category = turn.analysis ? turn.analysis->category : NormCategory{};
  const auto context = preceding();

  auto on_error = [self, join, tid](const std::string& msg) {
    if (join->failed) return;
    join->failed = true;
    self->fail(tid, msg);
  };
  auto try_finish = [self, join, tid, current] {
    if (join->failed || !join->impact || !join->remediation || !join->justification) return;
    CorrectionBundle b;
    b.translation = current.translated_text.value_or("");
    b.remediation = join->remediation->text;
    b.justification = join->justification->text;
    b.remediation_provenance = join->remediation->provenance;
    b.justification_provenance = join->justification->provenance;
    self->dispatch(EngineEvent::generated(self->id(), tid, GenerationResult{*join->impact, b}));
  };

  // Impact and remediation run concurrently; the justification follows the
  // remediation unless the generator already produced one.
  std::vector<Utterance> window = context;
  window.push_back(current);
  engine_.backends().classify_impact(
      window, *exec_, [join, on_error, try_finish](backends::Result<backends::ImpactOutcome> r) {
        if (!r.ok()) return on_error(r.error);
        join->impact = r.value->impact;
        try_finish();
      });
  engine_.backends().generate_remediation(
      context, current, category, *exec_,
      [self, join, on_error, try_finish, context, current,
       category](backends::Result<backends::TextOutcome> r) {
        if (join->failed) return;
        if (!r.ok()) return on_error(r.error);
        join->remediation = *r.value;
        if (r.value->justification) {
          backends::TextOutcome j;
          j.text = *r.value->justification;
          j.provenance = r.value->provenance;
          join->justification = std::move(j);
          return try_finish();
        }
        self->engine_.backends().generate_justification(
            context, current, category, r.value->text, *self->exec_,
            [join, on_error, try_finish](backends::Result<backends::TextOutcome> jr) {
              if (!jr.ok()) return on_error(jr.error);
              join->justification = std::move(*jr.value);
              try_finish();
            });
      });
}

Engine::Engine(EngineConfig config, std::shared_ptr<backends::BackendSet> backends,
               Outbox& outbox, ExecutorFactory executors, EngineObserver* observer)
    : config_(std::move(config)), backends_(std::move(backends)), outbox_(outbox),
      executors_(std::move(executors)), observer_(observer) {
  if (!backends_) throw ConfigError("engine needs a backend set");
}

std::shared_ptr<Session> Engine::session(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  auto s = std::make_shared<Session>(id, *this, executors_(id));
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<Session> Engine::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> Engine::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void Engine::on_session_ready(const std::string& session_id) {
  auto s = session(session_id);
  spdlog::info("[{}] both roles connected", session_id);
  if (observer_) {
    s->executor().post([this, session_id] { observer_->on_session_ready(session_id); });
  }
}

void Engine::on_speech(const std::string& session_id, Role speaker, std::string text,
                       std::optional<std::string> audio_ref) {
  session(session_id)->speech(speaker, std::move(text), std::move(audio_ref));
}

void Engine::on_choice(const std::string& session_id, Role from, TurnId turn, SenderChoice c) {
  session(session_id)->choice(from, turn, c);
}

}  // namespace nb
