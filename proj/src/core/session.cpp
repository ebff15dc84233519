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

#include "normbridge/core/session.hpp"

#include <algorithm>

#include "normbridge/core/error.hpp"

namespace nb {

SessionState append_turn(SessionState session, DialogueTurn turn) {
  if (!turn.delivered_text) {
    throw PreconditionError("cannot append " + format_turn_id(turn.id()) +
                            ": no delivered text");
  }
  if (session.pending && session.pending->id() != turn.id()) {
    throw PreconditionError("cannot append " + format_turn_id(turn.id()) +
                            ": pending turn is " +
                            format_turn_id(session.pending->id()));
  }
  if (!session.history.empty() &&
      turn.utterance.received_at <
          session.history.back().utterance.received_at) {
    throw PreconditionError("cannot append " + format_turn_id(turn.id()) +
                            ": timestamp precedes history");
  }
  session.history.push_back(std::move(turn));
  session.pending.reset();
  return session;
}

std::vector<Utterance> context_window(const SessionState& session,
                                      std::size_t n) {
  const std::size_t take = std::min(n, session.history.size());
  std::vector<Utterance> out;
  out.reserve(take + 1);
  for (auto it = session.history.end() - static_cast<std::ptrdiff_t>(take);
       it != session.history.end(); ++it) {
    out.push_back(it->utterance);
  }
  if (session.pending) out.push_back(session.pending->utterance);
  return out;
}

}  // namespace nb
