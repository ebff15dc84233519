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

#include "normbridge/core/types.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "normbridge/core/error.hpp"
#include "normbridge/engine/state.hpp"

namespace nb {

std::string_view to_string(Role r) noexcept {
  return r == Role::SME ? "SME" : "FLE";
}

std::optional<Role> parse_role(std::string_view s) noexcept {
  if (s == "SME") return Role::SME;
  if (s == "FLE") return Role::FLE;
  return std::nullopt;
}

std::string format_turn_id(TurnId id) { return "t" + std::to_string(id); }

std::optional<TurnId> parse_turn_id(std::string_view s) noexcept {
  if (s.size() < 2 || s.front() != 't') return std::nullopt;
  TurnId id = 0;
  const char* first = s.data() + 1;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, id);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return id;
}

CategorySet::CategorySet(std::vector<std::string> configured) {
  if (configured.size() != kConfigured) {
    throw ConfigError("expected exactly " + std::to_string(kConfigured) +
                      " norm categories, got " +
                      std::to_string(configured.size()));
  }
  std::set<std::string> seen;
  for (const auto& n : configured) {
    if (n.empty()) throw ConfigError("empty norm category name");
    if (n == kOther) {
      throw ConfigError("`Other` is appended automatically; do not configure it");
    }
    if (!seen.insert(n).second) {
      throw ConfigError("duplicate norm category: " + n);
    }
  }
  names_ = std::move(configured);
  names_.emplace_back(kOther);
}

CategorySet CategorySet::defaults() {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= kConfigured; ++i) {
    names.push_back("category_" + std::to_string(i));
  }
  return CategorySet(std::move(names));
}

const std::string& CategorySet::name(std::size_t index) const {
  if (index >= names_.size()) {
    throw PreconditionError("category index out of range: " +
                            std::to_string(index));
  }
  return names_[index];
}

std::optional<std::size_t> CategorySet::index_of(
    std::string_view name) const noexcept {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::string_view to_string(Impact i) noexcept {
  return i == Impact::Low ? "Low" : "High";
}

std::optional<Impact> parse_impact(std::string_view s) noexcept {
  if (s == "Low" || s == "low") return Impact::Low;
  if (s == "High" || s == "high") return Impact::High;
  return std::nullopt;
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::PrimaryBackend ? "PrimaryBackend" : "BackupBackend";
}

std::string_view to_string(DeliveryKind k) noexcept {
  return k == DeliveryKind::Translation ? "Translation" : "Remediation";
}

std::string_view to_string(SenderChoice c) noexcept {
  switch (c) {
    case SenderChoice::Translation: return "Translation";
    case SenderChoice::Remediation: return "Remediation";
    case SenderChoice::TimedOut: return "TimedOut";
  }
  return "?";
}

std::optional<DeliveryKind> parse_delivery_kind(std::string_view s) noexcept {
  if (s == "Translation" || s == "translation") return DeliveryKind::Translation;
  if (s == "Remediation" || s == "remediation") return DeliveryKind::Remediation;
  return std::nullopt;
}

std::optional<SenderChoice> parse_sender_choice(std::string_view s) noexcept {
  if (s == "Translation" || s == "translation") return SenderChoice::Translation;
  if (s == "Remediation" || s == "remediation") return SenderChoice::Remediation;
  if (s == "TimedOut" || s == "timeout") return SenderChoice::TimedOut;
  return std::nullopt;
}

std::string_view to_string(EngineState s) noexcept {
  switch (s) {
    case EngineState::Idle: return "Idle";
    case EngineState::Transcribing: return "Transcribing";
    case EngineState::Translating: return "Translating";
    case EngineState::Analyzing: return "Analyzing";
    case EngineState::Generating: return "Generating";
    case EngineState::AwaitingChoice: return "AwaitingChoice";
    case EngineState::Delivering: return "Delivering";
    case EngineState::Faulted: return "Faulted";
  }
  return "?";
}

std::optional<std::string> check_turn_invariants(const DialogueTurn& turn) {
  if (turn.error_notice) return std::nullopt;
  if (!turn.analysis) return "turn has no analysis";
  if (!turn.delivered_text || !turn.delivery_kind) return "turn not delivered";
  const auto& a = *turn.analysis;
  if (a.violated != a.impact.has_value()) {
    return "impact must be set iff the turn violates a norm";
  }
  if (!a.violated) {
    if (turn.bundle) return "non-violating turn carries a correction bundle";
    if (*turn.delivery_kind != DeliveryKind::Translation) {
      return "non-violating turn must deliver the translation";
    }
    if (turn.sender_choice) return "sender choice on a non-violating turn";
    return std::nullopt;
  }
  if (!turn.bundle) return "violating turn lacks a correction bundle";
  if (turn.bundle->remediation.empty() || turn.bundle->justification.empty()) {
    return "empty remediation or justification";
  }
  const bool remediated = *turn.delivery_kind == DeliveryKind::Remediation;
  if (remediated && *turn.delivered_text != turn.bundle->remediation) {
    return "delivered text does not match the remediation";
  }
  if (!remediated && *turn.delivered_text != turn.bundle->translation) {
    return "delivered text does not match the translation";
  }
  if (*a.impact == Impact::Low) {
    if (!remediated) return "low-impact turn must deliver the remediation";
    if (turn.sender_choice) return "sender choice on a low-impact turn";
    return std::nullopt;
  }
  if (!turn.sender_choice) return "high-impact turn without a sender choice";
  switch (*turn.sender_choice) {
    case SenderChoice::Translation:
      if (remediated) return "sender chose translation but got remediation";
      break;
    case SenderChoice::Remediation:
      if (!remediated) return "sender chose remediation but got translation";
      break;
    case SenderChoice::TimedOut:
      break;
  }
  return std::nullopt;
}

}  // namespace nb
