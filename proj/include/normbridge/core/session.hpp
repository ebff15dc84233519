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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "normbridge/core/types.hpp"
#include "normbridge/engine/state.hpp"

namespace nb {

/// One two-party session: FSM state, append-only history and the single
/// in-flight turn. Press-to-talk guarantees at most one pending turn.
struct SessionState {
  std::string session_id;
  EngineState fsm_state = EngineState::Idle;
  std::vector<DialogueTurn> history;
  std::optional<DialogueTurn> pending;
  LanguagePair langs;
};

/// Returns `session` with `turn` appended to the history and the pending
/// slot cleared.
///
/// Throws PreconditionError when the turn has no delivered text, when a
/// different turn is pending, or when its timestamp would go backwards.
SessionState append_turn(SessionState session, DialogueTurn turn);

/// The last min(n, |history|) utterances followed by the pending one,
/// oldest first.
std::vector<Utterance> context_window(const SessionState& session,
                                      std::size_t n);

}  // namespace nb
