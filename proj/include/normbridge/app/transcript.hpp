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
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "normbridge/core/types.hpp"

namespace nb {

/// A completed turn tagged with its session.
struct TranscriptEntry {
  std::string session_id;
  DialogueTurn turn;

  bool operator==(const TranscriptEntry&) const = default;
};

/// Stable field order, times in integer nanoseconds.
nlohmann::ordered_json to_json(const TranscriptEntry& e);
/// Throws ParseError for missing or mistyped fields.
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

/// One compact JSON object per line.
void write_transcript(std::ostream& out, const std::vector<TranscriptEntry>& entries);
/// Throws ParseError naming the 1-based line.
std::vector<TranscriptEntry> read_transcript(std::istream& in);

}  // namespace nb
