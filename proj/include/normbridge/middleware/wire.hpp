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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "normbridge/core/types.hpp"

namespace nb::wire {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 1 << 20;
inline constexpr std::size_t kMaxNestingDepth = 32;

enum class MessageType : std::uint8_t {
  hello,
  speech,
  transcript,
  translation,
  correction_prompt,
  choice,
  deliver,
  error,
  ack,
};

std::string_view to_string(MessageType t) noexcept;
std::optional<MessageType> parse_message_type(std::string_view s) noexcept;

/// One JSON text frame. `seq` increases strictly per connection and
/// direction; the hub stamps outbound frames.
struct WireMessage {
  MessageType type = MessageType::ack;
  std::string session_id;
  std::optional<std::string> turn_id;
  std::optional<Role> identity;
  std::uint64_t seq = 0;
  nlohmann::json body = nlohmann::json::object();

  bool operator==(const WireMessage&) const = default;
};

/// Canonical compact JSON, keys in the order type, session_id, turn_id,
/// identity, seq, body; absent optionals are omitted and body keys sorted.
/// Throws ProtocolError for messages that violate their type's schema.
std::string encode(const WireMessage& msg);

/// Throws ProtocolError for anything that is not a well-formed frame:
/// invalid UTF-8 or JSON, excessive size or nesting, unknown or missing
/// fields, wrongly typed values, or a body that violates the type's schema.
WireMessage decode(std::string_view frame);

/// Throws ProtocolError describing the first schema violation.
void validate(const WireMessage& msg);

WireMessage hello(std::string session, Role role);
WireMessage speech(std::string session, Role role, std::string text);
WireMessage choice(std::string session, Role role, TurnId turn, SenderChoice c);
WireMessage error(std::string session, std::optional<TurnId> turn, std::string code,
                  std::string message);
WireMessage ack(std::string session, std::optional<TurnId> turn, nlohmann::json body);

}  // namespace nb::wire
