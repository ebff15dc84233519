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

#include "normbridge/middleware/wire.hpp"

#include <set>

#include "normbridge/core/error.hpp"

namespace nb::wire {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(MessageType t) noexcept {
  switch (t) {
    case MessageType::hello: return "hello";
    case MessageType::speech: return "speech";
    case MessageType::transcript: return "transcript";
    case MessageType::translation: return "translation";
    case MessageType::correction_prompt: return "correction_prompt";
    case MessageType::choice: return "choice";
    case MessageType::deliver: return "deliver";
    case MessageType::error: return "error";
    case MessageType::ack: return "ack";
  }
  return "?";
}

std::optional<MessageType> parse_message_type(std::string_view s) noexcept {
  static constexpr MessageType all[] = {
      MessageType::hello,   MessageType::speech,  MessageType::transcript,
      MessageType::translation, MessageType::correction_prompt,
      MessageType::choice,  MessageType::deliver, MessageType::error,
      MessageType::ack};
  for (auto t : all) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

namespace {

void require_string(const json& body, const char* key, MessageType t) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw ProtocolError(std::string(to_string(t)) + " body needs string field '" + key + "'");
  }
}

void require_turn(const WireMessage& m) {
  if (!m.turn_id || !parse_turn_id(*m.turn_id)) {
    throw ProtocolError(std::string(to_string(m.type)) + " needs a valid turn_id");
  }
}

// Brackets outside string literals; rejects deep nesting before the
// recursive parser sees it.
void check_depth(std::string_view frame) {
  std::size_t depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : frame) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      if (++depth > kMaxNestingDepth) throw ProtocolError("frame nested too deeply");
    } else if ((c == '}' || c == ']') && depth > 0) {
      --depth;
    }
  }
}

}  // namespace

void validate(const WireMessage& m) {
  if (m.session_id.empty()) throw ProtocolError("empty session_id");
  if (!m.body.is_object()) throw ProtocolError("body must be an object");
  if (m.turn_id && !parse_turn_id(*m.turn_id)) {
    throw ProtocolError("malformed turn_id '" + *m.turn_id + "'");
  }
  const auto& b = m.body;
  switch (m.type) {
    case MessageType::hello:
      if (!m.identity) throw ProtocolError("hello needs an identity");
      if (!b.contains("v") || !b["v"].is_number_integer() || b["v"].get<long long>() != kProtocolVersion) {
        throw ProtocolError("hello must carry protocol version v:1");
      }
      break;
    case MessageType::speech: {
      if (!m.identity) throw ProtocolError("speech needs an identity");
      const bool has_text = b.contains("text") && b["text"].is_string();
      const bool has_audio = b.contains("audio_ref") && b["audio_ref"].is_string();
      if (!has_text && !has_audio) throw ProtocolError("speech needs text or audio_ref");
      if (b.contains("text") && !b["text"].is_string()) throw ProtocolError("speech text must be a string");
      if (has_text && !has_audio && b["text"].get_ref<const std::string&>().empty()) {
        throw ProtocolError("speech text is empty");
      }
      break;
    }
    case MessageType::transcript:
    case MessageType::translation:
      require_string(b, "text", m.type);
      break;
    case MessageType::correction_prompt:
      require_turn(m);
      require_string(b, "translation", m.type);
      require_string(b, "remediation", m.type);
      require_string(b, "justification", m.type);
      break;
    case MessageType::choice: {
      require_turn(m);
      if (!m.identity) throw ProtocolError("choice needs an identity");
      require_string(b, "choice", m.type);
      const auto& c = b["choice"].get_ref<const std::string&>();
      if (c != "translation" && c != "remediation") {
        throw ProtocolError("choice must be translation or remediation");
      }
      break;
    }
    case MessageType::deliver:
      require_turn(m);
      require_string(b, "text", m.type);
      break;
    case MessageType::error:
      require_string(b, "code", m.type);
      require_string(b, "message", m.type);
      break;
    case MessageType::ack:
      break;
  }
}

std::string encode(const WireMessage& msg) {
  validate(msg);
  try {
    ordered_json j;
    j["type"] = std::string(to_string(msg.type));
    j["session_id"] = msg.session_id;
    if (msg.turn_id) j["turn_id"] = *msg.turn_id;
    if (msg.identity) j["identity"] = std::string(to_string(*msg.identity));
    j["seq"] = msg.seq;
    j["body"] = ordered_json::parse(msg.body.dump());  // sorted keys
    return j.dump();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("cannot encode frame: ") + e.what());
  }
}

WireMessage decode(std::string_view frame) {
  if (frame.size() > kMaxFrameBytes) throw ProtocolError("frame too large");
  check_depth(frame);
  json j;
  try {
    j = json::parse(frame.begin(), frame.end());
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("frame is not a JSON object");
  static const std::set<std::string> known{"type", "session_id", "turn_id",
                                           "identity", "seq", "body"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ProtocolError("unknown field '" + item.key() + "'");
  }
  if (!j.contains("type")) throw ProtocolError("missing type");
  if (!j["type"].is_string()) throw ProtocolError("type must be a string");
  WireMessage m;
  auto type = parse_message_type(j["type"].get_ref<const std::string&>());
  if (!type) throw ProtocolError("unknown message type");
  m.type = *type;
  if (!j.contains("session_id") || !j["session_id"].is_string()) {
    throw ProtocolError("missing session_id");
  }
  m.session_id = j["session_id"].get<std::string>();
  if (j.contains("turn_id")) {
    if (!j["turn_id"].is_string()) throw ProtocolError("turn_id must be a string");
    m.turn_id = j["turn_id"].get<std::string>();
  }
  if (j.contains("identity")) {
    if (!j["identity"].is_string()) throw ProtocolError("identity must be a string");
    m.identity = parse_role(j["identity"].get_ref<const std::string&>());
    if (!m.identity) throw ProtocolError("identity must be SME or FLE");
  }
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
    throw ProtocolError("seq must be a non-negative integer");
  }
  m.seq = j["seq"].get<std::uint64_t>();
  if (j.contains("body")) m.body = j["body"];
  validate(m);
  return m;
}

WireMessage hello(std::string session, Role role) {
  WireMessage m;
  m.type = MessageType::hello;
  m.session_id = std::move(session);
  m.identity = role;
  m.body = {{"v", kProtocolVersion}};
  return m;
}

WireMessage speech(std::string session, Role role, std::string text) {
  WireMessage m;
  m.type = MessageType::speech;
  m.session_id = std::move(session);
  m.identity = role;
  m.body = {{"text", std::move(text)}};
  return m;
}

WireMessage choice(std::string session, Role role, TurnId turn, SenderChoice c) {
  WireMessage m;
  m.type = MessageType::choice;
  m.session_id = std::move(session);
  m.turn_id = format_turn_id(turn);
  m.identity = role;
  m.body = {{"choice", c == SenderChoice::Remediation ? "remediation" : "translation"}};
  return m;
}

WireMessage error(std::string session, std::optional<TurnId> turn, std::string code,
                  std::string message) {
  WireMessage m;
  m.type = MessageType::error;
  m.session_id = std::move(session);
  if (turn) m.turn_id = format_turn_id(*turn);
  m.body = {{"code", std::move(code)}, {"message", std::move(message)}};
  return m;
}

WireMessage ack(std::string session, std::optional<TurnId> turn, nlohmann::json body) {
  WireMessage m;
  m.type = MessageType::ack;
  m.session_id = std::move(session);
  if (turn) m.turn_id = format_turn_id(*turn);
  m.body = body.is_object() ? std::move(body) : nlohmann::json::object();
  return m;
}

}  // namespace nb::wire
