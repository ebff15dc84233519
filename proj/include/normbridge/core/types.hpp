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

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nb {

/// Time is measured from the owning executor's epoch so that simulated
/// and wall-clock runs share one representation.
using Duration = std::chrono::nanoseconds;
using Timestamp = Duration;

inline double to_ms(Duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}
inline double to_seconds(Duration d) {
  return std::chrono::duration<double>(d).count();
}

/// Interlocutor identity carried by every inbound speech message.
enum class Role : std::uint8_t { SME, FLE };

std::string_view to_string(Role r) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;
/// The other party of a two-party session.
constexpr Role peer_of(Role r) noexcept {
  return r == Role::SME ? Role::FLE : Role::SME;
}

using TurnId = std::uint64_t;

std::string format_turn_id(TurnId id);
std::optional<TurnId> parse_turn_id(std::string_view s) noexcept;

/// The seven configured norm category names with `Other` appended.
class CategorySet {
 public:
  static constexpr std::size_t kConfigured = 7;
  static constexpr std::size_t kSize = kConfigured + 1;
  static constexpr std::string_view kOther = "Other";

  /// Throws ConfigError unless given exactly seven distinct, non-empty names
  /// none of which is `Other`.
  explicit CategorySet(std::vector<std::string> configured);

  /// Placeholder names `category_1` .. `category_7`.
  static CategorySet defaults();

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t index) const;
  std::optional<std::size_t> index_of(std::string_view name) const noexcept;
  std::size_t other_index() const noexcept { return kConfigured; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

struct NormCategory {
  std::size_t index = CategorySet::kConfigured;
  std::string name = std::string(CategorySet::kOther);

  bool operator==(const NormCategory&) const = default;
};

enum class Impact : std::uint8_t { Low, High };
std::string_view to_string(Impact i) noexcept;
std::optional<Impact> parse_impact(std::string_view s) noexcept;

struct NormAnalysis {
  NormCategory category;
  bool violated = false;
  std::optional<Impact> impact;  // set iff violated, once classified

  bool operator==(const NormAnalysis&) const = default;
};

enum class Provenance : std::uint8_t { PrimaryBackend, BackupBackend };
std::string_view to_string(Provenance p) noexcept;

struct CorrectionBundle {
  std::string translation;
  std::string remediation;
  std::string justification;
  Provenance remediation_provenance = Provenance::PrimaryBackend;
  Provenance justification_provenance = Provenance::PrimaryBackend;

  bool operator==(const CorrectionBundle&) const = default;
};

struct Utterance {
  TurnId id = 0;
  Role speaker = Role::SME;
  std::string source_text;
  std::string source_lang;
  std::optional<std::string> translated_text;
  std::string target_lang;
  Timestamp received_at{};
  /// Opaque reference to recorded audio for real ASR adapters.
  std::optional<std::string> audio_ref;

  bool operator==(const Utterance&) const = default;
};

enum class DeliveryKind : std::uint8_t { Translation, Remediation };
enum class SenderChoice : std::uint8_t { Translation, Remediation, TimedOut };

std::string_view to_string(DeliveryKind k) noexcept;
std::string_view to_string(SenderChoice c) noexcept;
std::optional<DeliveryKind> parse_delivery_kind(std::string_view s) noexcept;
std::optional<SenderChoice> parse_sender_choice(std::string_view s) noexcept;

struct DialogueTurn {
  Utterance utterance;
  std::optional<NormAnalysis> analysis;
  std::optional<CorrectionBundle> bundle;
  std::optional<std::string> delivered_text;
  std::optional<DeliveryKind> delivery_kind;
  std::optional<SenderChoice> sender_choice;
  /// Set when the pipeline faulted; the turn then carries the raw translation
  /// (when one exists) and is exempt from the routing invariants.
  std::optional<std::string> error_notice;
  /// When the turn entered Delivering.
  std::optional<Timestamp> delivering_at;

  TurnId id() const noexcept { return utterance.id; }
  Role sender() const noexcept { return utterance.speaker; }
  Role receiver() const noexcept { return peer_of(utterance.speaker); }

  bool operator==(const DialogueTurn&) const = default;
};

/// Checks the per-turn routing invariants of a completed, non-faulted turn.
/// Returns a description of the first violation, or nullopt.
std::optional<std::string> check_turn_invariants(const DialogueTurn& turn);

/// Source/target language per role. A turn spoken by `r` is translated from
/// `lang(r)` into `lang(peer_of(r))`.
struct LanguagePair {
  std::string sme = "en";
  std::string fle = "zh";

  const std::string& lang(Role r) const noexcept {
    return r == Role::SME ? sme : fle;
  }
  bool operator==(const LanguagePair&) const = default;
};

}  // namespace nb
