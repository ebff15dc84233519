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

#include "normbridge/eval/study.hpp"

namespace nb::eval {

ChoiceStats choice_stats(std::span<const DialogueTurn> turns) {
  ChoiceStats s;
  for (const auto& t : turns) {
    if (t.error_notice || !t.analysis || !t.analysis->violated || !t.analysis->impact) continue;
    if (*t.analysis->impact == Impact::Low) {
      ++s.low_impact;
      continue;
    }
    ++s.high_impact;
    if (t.sender_choice == SenderChoice::Remediation) ++s.remediation_chosen;
  }
  if (s.high_impact > 0) {
    s.ratio = static_cast<double>(s.remediation_chosen) / static_cast<double>(s.high_impact);
  }
  return s;
}

std::map<LatencyPath, Duration> latency_means(std::span<const LatencyRecord> records) {
  std::map<LatencyPath, std::pair<Duration, std::int64_t>> sums;
  for (const auto& r : records) {
    auto& [total, n] = sums[r.path];
    total += r.elapsed;
    ++n;
  }
  std::map<LatencyPath, Duration> means;
  for (const auto& [path, acc] : sums) means[path] = acc.first / acc.second;
  return means;
}

}  // namespace nb::eval
