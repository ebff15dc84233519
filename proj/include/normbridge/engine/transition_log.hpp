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

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "normbridge/core/types.hpp"
#include "normbridge/engine/fsm.hpp"

namespace nb {

/// One accepted state transition.
struct TransitionRecord {
  std::string session_id;
  TurnId turn_id = 0;
  EngineState from = EngineState::Idle;
  EventKind event = EventKind::SpeechReceived;
  EngineState to = EngineState::Idle;
  /// Since the turn's speech was received.
  Duration elapsed{};

  bool operator==(const TransitionRecord&) const = default;
};

/// `session_id<TAB>turn_id<TAB>from_state<TAB>event<TAB>to_state<TAB>elapsed_ms`
/// with elapsed_ms printed to microsecond precision.
std::string format_transition(const TransitionRecord& r);
/// Throws ParseError on malformed lines.
TransitionRecord parse_transition(std::string_view line);

/// Reads a transition log. Throws ParseError naming the 1-based line.
std::vector<TransitionRecord> read_transition_log(std::istream& in);

/// Latency per completed turn reconstructed from a transition log: the
/// elapsed time on entering Delivering, with the path implied by the state
/// the turn left. Faulted turns are skipped.
std::vector<LatencyRecord> latencies_from_log(const std::vector<TransitionRecord>& log);

}  // namespace nb
