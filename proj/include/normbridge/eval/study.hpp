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
#include <map>
#include <optional>
#include <span>

#include "normbridge/core/types.hpp"
#include "normbridge/engine/fsm.hpp"

namespace nb::eval {

struct ChoiceStats {
  std::size_t low_impact = 0;
  std::size_t high_impact = 0;
  std::size_t remediation_chosen = 0;
  /// remediation_chosen / high_impact; absent without high-impact turns.
  std::optional<double> ratio;
};

/// Counts violating turns by impact and the sender's remediation picks.
/// Faulted turns are skipped.
ChoiceStats choice_stats(std::span<const DialogueTurn> turns);

/// Arithmetic mean per path. Paths without records are absent.
std::map<LatencyPath, Duration> latency_means(std::span<const LatencyRecord> records);

}  // namespace nb::eval
