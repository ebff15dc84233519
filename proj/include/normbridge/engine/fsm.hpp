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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "normbridge/core/types.hpp"
#include "normbridge/engine/state.hpp"

namespace nb {

enum class EventKind : std::uint8_t {
  SpeechReceived,
  TranscriptReady,
  TranslationReady,
  AnalysisReady,
  GenerationReady,
  ChoiceReceived,
  ChoiceTimeout,
  BackendError,
  DeliveryAcked,
};

std::string_view to_string(EventKind k) noexcept;

struct GenerationResult {
  Impact impact = Impact::Low;
  std::optional<CorrectionBundle> bundle;
};

/// An input to the state machine. Only the payload field matching `kind`
/// is read.
struct EngineEvent {
  EventKind kind = EventKind::SpeechReceived;
  std::string session_id;
  TurnId turn_id = 0;
  Timestamp at{};

  std::optional<Utterance> utterance;          // SpeechReceived
  std::optional<std::string> text;             // TranscriptReady, TranslationReady
  std::optional<NormAnalysis> analysis;        // AnalysisReady
  std::optional<GenerationResult> generation;  // GenerationReady
  std::optional<SenderChoice> choice;          // ChoiceReceived
  std::optional<std::string> error;            // BackendError

  static EngineEvent speech(std::string session, Utterance u);
  static EngineEvent transcript(std::string session, TurnId id, std::string text);
  static EngineEvent translation(std::string session, TurnId id, std::string text);
  static EngineEvent analyzed(std::string session, TurnId id, NormAnalysis a);
  static EngineEvent generated(std::string session, TurnId id, GenerationResult g);
  static EngineEvent chosen(std::string session, TurnId id, SenderChoice c);
  static EngineEvent timeout(std::string session, TurnId id);
  static EngineEvent failure(std::string session, TurnId id, std::string message);
  static EngineEvent acked(std::string session, TurnId id);
};

/// What to do when the sender does not answer a correction prompt.
struct TimeoutPolicy {
  Duration timeout = std::chrono::seconds(60);
  DeliveryKind delivery = DeliveryKind::Translation;
};

// Actions emitted by `advance`. The runtime executes them in order.
enum class Stage : std::uint8_t { Transcribe, Translate, Analyze, Generate };
std::string_view to_string(Stage s) noexcept;

struct InvokeStage {
  Stage stage;
};
enum class NoticeKind : std::uint8_t { Transcript, Translation, DeliveryReport, Error };
struct Notify {
  Role target;
  NoticeKind kind;
  std::string text;
};
struct Deliver {
  Role target;
  DeliveryKind kind;
  std::string text;
};
struct PromptSender {
  Role target;
  std::string translation;
  std::string remediation;
  std::string justification;
};
struct StartChoiceTimer {};
struct CancelChoiceTimer {};
struct AppendHistory {};
struct DiscardTurn {};

using Action = std::variant<InvokeStage, Notify, Deliver, PromptSender,
                            StartChoiceTimer, CancelChoiceTimer, AppendHistory,
                            DiscardTurn>;

struct Step {
  EngineState next = EngineState::Idle;
  DialogueTurn turn;
  std::vector<Action> actions;
  /// Set when the event was not legal; state, turn and actions are then
  /// unchanged/empty.
  std::optional<std::string> rejected;

  bool accepted() const noexcept { return !rejected; }
};

/// The pipeline transition function. Pure: identical inputs give identical
/// steps, which is what makes replays reproducible.
Step advance(EngineState state, const EngineEvent& event, const DialogueTurn& turn,
             const TimeoutPolicy& policy = {});

enum class RouteAction : std::uint8_t { DeliverTranslation, DeliverRemediation, PromptSender };
std::string_view to_string(RouteAction a) noexcept;

struct RoutingDecision {
  RouteAction action;
  Role target;

  bool operator==(const RoutingDecision&) const = default;
};

/// Low impact delivers the remediation to the receiver; high impact prompts
/// the sender. Throws BackendError without a bundle and PreconditionError for
/// analyses that are not classified violations.
RoutingDecision route_by_impact(const NormAnalysis& analysis,
                                const std::optional<CorrectionBundle>& bundle,
                                Role sender);

/// Applies the sender's pick. Throws PreconditionError if the turn is not an
/// unresolved high-impact turn or `choice` is TimedOut.
DialogueTurn resolve_choice(DialogueTurn turn, SenderChoice choice);

/// Marks the turn TimedOut and delivers per policy.
DialogueTurn timeout_choice(DialogueTurn turn, const TimeoutPolicy& policy);

enum class LatencyPath : std::uint8_t { NoRemediation, LowImpact, HighImpact };
std::string_view to_string(LatencyPath p) noexcept;
std::optional<LatencyPath> parse_latency_path(std::string_view s) noexcept;

struct LatencyRecord {
  TurnId turn_id = 0;
  LatencyPath path = LatencyPath::NoRemediation;
  Duration elapsed{};
};

/// Elapsed time from speech receipt to entering Delivering. Throws
/// PreconditionError for faulted or incomplete turns.
LatencyRecord record_latency(const DialogueTurn& turn);

}  // namespace nb
