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

#include "normbridge/engine/fsm.hpp"

#include "normbridge/core/error.hpp"

namespace nb {

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::SpeechReceived: return "SpeechReceived";
    case EventKind::TranscriptReady: return "TranscriptReady";
    case EventKind::TranslationReady: return "TranslationReady";
    case EventKind::AnalysisReady: return "AnalysisReady";
    case EventKind::GenerationReady: return "GenerationReady";
    case EventKind::ChoiceReceived: return "ChoiceReceived";
    case EventKind::ChoiceTimeout: return "ChoiceTimeout";
    case EventKind::BackendError: return "BackendError";
    case EventKind::DeliveryAcked: return "DeliveryAcked";
  }
  return "?";
}

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Transcribe: return "Transcribe";
    case Stage::Translate: return "Translate";
    case Stage::Analyze: return "Analyze";
    case Stage::Generate: return "Generate";
  }
  return "?";
}

std::string_view to_string(RouteAction a) noexcept {
  switch (a) {
    case RouteAction::DeliverTranslation: return "DeliverTranslation";
    case RouteAction::DeliverRemediation: return "DeliverRemediation";
    case RouteAction::PromptSender: return "PromptSender";
  }
  return "?";
}

std::string_view to_string(LatencyPath p) noexcept {
  switch (p) {
    case LatencyPath::NoRemediation: return "NoRemediation";
    case LatencyPath::LowImpact: return "LowImpact";
    case LatencyPath::HighImpact: return "HighImpact";
  }
  return "?";
}

std::optional<LatencyPath> parse_latency_path(std::string_view s) noexcept {
  if (s == "NoRemediation") return LatencyPath::NoRemediation;
  if (s == "LowImpact") return LatencyPath::LowImpact;
  if (s == "HighImpact") return LatencyPath::HighImpact;
  return std::nullopt;
}

namespace {

EngineEvent make(EventKind kind, std::string session, TurnId id) {
  EngineEvent e;
  e.kind = kind;
  e.session_id = std::move(session);
  e.turn_id = id;
  return e;
}

Step reject(EngineState state, const EngineEvent& event, const DialogueTurn& turn,
            std::string why) {
  Step s;
  s.next = state;
  s.turn = turn;
  s.rejected = std::string(to_string(event.kind)) + " in " +
               std::string(to_string(state)) + ": " + std::move(why);
  return s;
}

Step deliver(Step s, Timestamp at) {
  s.next = EngineState::Delivering;
  s.turn.delivering_at = at;
  s.actions.push_back(Deliver{s.turn.receiver(), *s.turn.delivery_kind,
                              *s.turn.delivered_text});
  s.actions.push_back(Notify{s.turn.sender(), NoticeKind::DeliveryReport,
                             std::string(to_string(*s.turn.delivery_kind))});
  return s;
}

bool backend_stage(EngineState s) {
  return s == EngineState::Transcribing || s == EngineState::Translating ||
         s == EngineState::Analyzing || s == EngineState::Generating;
}

}  // namespace

EngineEvent EngineEvent::speech(std::string session, Utterance u) {
  auto e = make(EventKind::SpeechReceived, std::move(session), u.id);
  e.at = u.received_at;
  e.utterance = std::move(u);
  return e;
}
EngineEvent EngineEvent::transcript(std::string session, TurnId id, std::string text) {
  auto e = make(EventKind::TranscriptReady, std::move(session), id);
  e.text = std::move(text);
  return e;
}
EngineEvent EngineEvent::translation(std::string session, TurnId id, std::string text) {
  auto e = make(EventKind::TranslationReady, std::move(session), id);
  e.text = std::move(text);
  return e;
}
EngineEvent EngineEvent::analyzed(std::string session, TurnId id, NormAnalysis a) {
  auto e = make(EventKind::AnalysisReady, std::move(session), id);
  e.analysis = std::move(a);
  return e;
}
EngineEvent EngineEvent::generated(std::string session, TurnId id, GenerationResult g) {
  auto e = make(EventKind::GenerationReady, std::move(session), id);
  e.generation = std::move(g);
  return e;
}
EngineEvent EngineEvent::chosen(std::string session, TurnId id, SenderChoice c) {
  auto e = make(EventKind::ChoiceReceived, std::move(session), id);
  e.choice = c;
  return e;
}
EngineEvent EngineEvent::timeout(std::string session, TurnId id) {
  return make(EventKind::ChoiceTimeout, std::move(session), id);
}
EngineEvent EngineEvent::failure(std::string session, TurnId id, std::string message) {
  auto e = make(EventKind::BackendError, std::move(session), id);
  e.error = std::move(message);
  return e;
}
EngineEvent EngineEvent::acked(std::string session, TurnId id) {
  return make(EventKind::DeliveryAcked, std::move(session), id);
}

RoutingDecision route_by_impact(const NormAnalysis& analysis,
                                const std::optional<CorrectionBundle>& bundle,
                                Role sender) {
  if (!analysis.violated || !analysis.impact) {
    throw PreconditionError("impact routing needs a classified violation");
  }
  if (!bundle) throw BackendError("no correction bundle for a violating turn");
  if (*analysis.impact == Impact::Low) {
    return {RouteAction::DeliverRemediation, peer_of(sender)};
  }
  return {RouteAction::PromptSender, sender};
}

DialogueTurn resolve_choice(DialogueTurn turn, SenderChoice choice) {
  if (choice == SenderChoice::TimedOut) {
    throw PreconditionError("TimedOut is not a sender choice");
  }
  if (turn.sender_choice) {
    throw PreconditionError(format_turn_id(turn.id()) + " already resolved");
  }
  if (!turn.analysis || !turn.analysis->violated ||
      turn.analysis->impact != Impact::High || !turn.bundle) {
    throw PreconditionError(format_turn_id(turn.id()) +
                            " is not awaiting a sender choice");
  }
  turn.sender_choice = choice;
  if (choice == SenderChoice::Remediation) {
    turn.delivery_kind = DeliveryKind::Remediation;
    turn.delivered_text = turn.bundle->remediation;
  } else {
    turn.delivery_kind = DeliveryKind::Translation;
    turn.delivered_text = turn.bundle->translation;
  }
  return turn;
}

DialogueTurn timeout_choice(DialogueTurn turn, const TimeoutPolicy& policy) {
  if (!turn.bundle) {
    throw PreconditionError(format_turn_id(turn.id()) + " has no bundle");
  }
  turn.sender_choice = SenderChoice::TimedOut;
  turn.delivery_kind = policy.delivery;
  turn.delivered_text = policy.delivery == DeliveryKind::Remediation
                            ? turn.bundle->remediation
                            : turn.bundle->translation;
  return turn;
}

LatencyRecord record_latency(const DialogueTurn& turn) {
  if (turn.error_notice || !turn.analysis || !turn.delivering_at) {
    throw PreconditionError(format_turn_id(turn.id()) +
                            " did not complete the pipeline");
  }
  LatencyRecord r;
  r.turn_id = turn.id();
  if (!turn.analysis->violated) {
    r.path = LatencyPath::NoRemediation;
  } else {
    r.path = turn.analysis->impact == Impact::High ? LatencyPath::HighImpact
                                                   : LatencyPath::LowImpact;
  }
  r.elapsed = *turn.delivering_at - turn.utterance.received_at;
  return r;
}

Step advance(EngineState state, const EngineEvent& event, const DialogueTurn& turn,
             const TimeoutPolicy& policy) {
  if (event.kind != EventKind::SpeechReceived && state != EngineState::Idle &&
      event.turn_id != turn.id()) {
    return reject(state, event, turn,
                  "stale turn " + format_turn_id(event.turn_id) + ", current is " +
                      format_turn_id(turn.id()));
  }

  Step s;
  s.turn = turn;

  if (event.kind == EventKind::BackendError) {
    if (!backend_stage(state)) return reject(state, event, turn, "no backend call in flight");
    s.next = EngineState::Faulted;
    s.turn.error_notice = event.error.value_or("backend failure");
    // Keep the conversation going with whatever translation exists.
    if (s.turn.utterance.translated_text) {
      s.turn.delivered_text = *s.turn.utterance.translated_text;
      s.turn.delivery_kind = DeliveryKind::Translation;
      s.turn.bundle.reset();
      s.turn.delivering_at = event.at;
      s.actions.push_back(Deliver{s.turn.receiver(), DeliveryKind::Translation,
                                  *s.turn.delivered_text});
    }
    s.actions.push_back(Notify{s.turn.sender(), NoticeKind::Error, *s.turn.error_notice});
    return s;
  }

  switch (state) {
    case EngineState::Idle:
      if (event.kind != EventKind::SpeechReceived || !event.utterance) break;
      s.turn = DialogueTurn{};
      s.turn.utterance = *event.utterance;
      s.next = EngineState::Transcribing;
      s.actions.push_back(InvokeStage{Stage::Transcribe});
      return s;

    case EngineState::Transcribing:
      if (event.kind != EventKind::TranscriptReady || !event.text) break;
      if (event.text->empty()) return reject(state, event, turn, "empty transcript");
      s.turn.utterance.source_text = *event.text;
      s.next = EngineState::Translating;
      s.actions.push_back(Notify{s.turn.sender(), NoticeKind::Transcript, *event.text});
      s.actions.push_back(InvokeStage{Stage::Translate});
      return s;

    case EngineState::Translating:
      if (event.kind != EventKind::TranslationReady || !event.text) break;
      s.turn.utterance.translated_text = *event.text;
      s.next = EngineState::Analyzing;
      s.actions.push_back(Notify{s.turn.sender(), NoticeKind::Translation, *event.text});
      s.actions.push_back(InvokeStage{Stage::Analyze});
      return s;

    case EngineState::Analyzing: {
      if (event.kind != EventKind::AnalysisReady || !event.analysis) break;
      NormAnalysis a = *event.analysis;
      a.impact.reset();
      s.turn.analysis = a;
      if (!a.violated) {
        s.turn.delivery_kind = DeliveryKind::Translation;
        s.turn.delivered_text = *s.turn.utterance.translated_text;
        return deliver(std::move(s), event.at);
      }
      s.next = EngineState::Generating;
      s.actions.push_back(InvokeStage{Stage::Generate});
      return s;
    }

    case EngineState::Generating: {
      if (event.kind != EventKind::GenerationReady || !event.generation) break;
      if (!event.generation->bundle) {
        return reject(state, event, turn, "generation result without bundle");
      }
      s.turn.analysis->impact = event.generation->impact;
      s.turn.bundle = event.generation->bundle;
      const auto route = route_by_impact(*s.turn.analysis, s.turn.bundle, s.turn.sender());
      if (route.action == RouteAction::DeliverRemediation) {
        s.turn.delivery_kind = DeliveryKind::Remediation;
        s.turn.delivered_text = s.turn.bundle->remediation;
        return deliver(std::move(s), event.at);
      }
      s.next = EngineState::AwaitingChoice;
      s.actions.push_back(PromptSender{route.target, s.turn.bundle->translation,
                                       s.turn.bundle->remediation,
                                       s.turn.bundle->justification});
      s.actions.push_back(StartChoiceTimer{});
      return s;
    }

    case EngineState::AwaitingChoice:
      if (event.kind == EventKind::ChoiceReceived && event.choice &&
          *event.choice != SenderChoice::TimedOut) {
        s.turn = resolve_choice(std::move(s.turn), *event.choice);
      } else if (event.kind == EventKind::ChoiceTimeout) {
        s.turn = timeout_choice(std::move(s.turn), policy);
      } else {
        break;
      }
      s.actions.push_back(CancelChoiceTimer{});
      return deliver(std::move(s), event.at);

    case EngineState::Delivering:
      if (event.kind != EventKind::DeliveryAcked) break;
      s.next = EngineState::Idle;
      s.actions.push_back(AppendHistory{});
      return s;

    case EngineState::Faulted:
      if (event.kind != EventKind::DeliveryAcked) break;
      s.next = EngineState::Idle;
      if (s.turn.delivered_text) {
        s.actions.push_back(AppendHistory{});
      } else {
        s.actions.push_back(DiscardTurn{});
      }
      return s;
  }
  return reject(state, event, turn, "not a legal transition");
}

}  // namespace nb
