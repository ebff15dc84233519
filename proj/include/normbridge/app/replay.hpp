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

#include <map>
#include <string>
#include <vector>

#include "normbridge/app/config.hpp"
#include "normbridge/app/script.hpp"
#include "normbridge/app/transcript.hpp"
#include "normbridge/core/error.hpp"
#include "normbridge/engine/transition_log.hpp"
#include "normbridge/eval/study.hpp"

namespace nb {

/// A scripted choice met a turn that never prompted its sender.
class ScriptMismatch : public Error {
 public:
  ScriptMismatch(std::string message, std::vector<std::string> turns)
      : Error(std::move(message)), turns_(std::move(turns)) {}
  /// `dialogue/turn` for every offending step.
  const std::vector<std::string>& turns() const noexcept { return turns_; }

 private:
  std::vector<std::string> turns_;
};

struct ReplayResult {
  std::vector<TranscriptEntry> transcript;
  std::vector<TransitionRecord> transitions;
  std::vector<LatencyRecord> latencies;
  eval::ChoiceStats choices;
  std::map<LatencyPath, Duration> latency_means;
  std::size_t faulted = 0;
  /// Prompts that arose without a scripted choice and therefore timed out.
  std::size_t unscripted_prompts = 0;
  Duration simulated{};
};

/// Runs every dialogue headlessly, one after the other, on simulated time:
/// both roles connect through loopback clients, each step is spoken once the
/// previous turn completed, and senders answer correction prompts with the
/// scripted choice. Deterministic for stub backends.
///
/// Throws ScriptMismatch listing the turns whose scripted choice had no
/// prompt.
ReplayResult replay(const std::vector<ScriptedDialogue>& script, const AppConfig& config);

}  // namespace nb
