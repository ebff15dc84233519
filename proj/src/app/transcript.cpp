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

#include "normbridge/app/transcript.hpp"

#include <string>

#include "normbridge/core/error.hpp"

namespace nb {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::int64_t ns(Duration d) { return d.count(); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing field `") + key + "`");
  }
  return j.at(key);
}

std::string str(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ParseError(std::string("field `") + key + "` must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return str(j, key);
}

Duration nanos(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) {
    throw ParseError(std::string("field `") + key + "` must be an integer");
  }
  return Duration(v.get<std::int64_t>());
}

template <typename T, typename F>
T parse_enum(const json& j, const char* key, F parse) {
  auto v = parse(str(j, key));
  if (!v) throw ParseError(std::string("bad value for `") + key + "`");
  return *v;
}

Provenance parse_provenance(const std::string& s) {
  if (s == to_string(Provenance::PrimaryBackend)) return Provenance::PrimaryBackend;
  if (s == to_string(Provenance::BackupBackend)) return Provenance::BackupBackend;
  throw ParseError("bad provenance: " + s);
}

}  // namespace

ordered_json to_json(const TranscriptEntry& e) {
  const auto& t = e.turn;
  const auto& u = t.utterance;
  ordered_json j;
  j["session"] = e.session_id;
  j["turn"] = format_turn_id(u.id);
  j["speaker"] = std::string(to_string(u.speaker));
  j["source_lang"] = u.source_lang;
  j["target_lang"] = u.target_lang;
  j["source_text"] = u.source_text;
  if (u.translated_text) j["translated_text"] = *u.translated_text;
  if (u.audio_ref) j["audio_ref"] = *u.audio_ref;
  j["received_at_ns"] = ns(u.received_at);
  if (t.analysis) {
    ordered_json a;
    a["category"] = t.analysis->category.name;
    a["category_index"] = t.analysis->category.index;
    a["violated"] = t.analysis->violated;
    if (t.analysis->impact) a["impact"] = std::string(to_string(*t.analysis->impact));
    j["analysis"] = std::move(a);
  }
  if (t.bundle) {
    ordered_json b;
    b["translation"] = t.bundle->translation;
    b["remediation"] = t.bundle->remediation;
    b["justification"] = t.bundle->justification;
    b["remediation_provenance"] = std::string(to_string(t.bundle->remediation_provenance));
    b["justification_provenance"] =
        std::string(to_string(t.bundle->justification_provenance));
    j["bundle"] = std::move(b);
  }
  if (t.sender_choice) j["sender_choice"] = std::string(to_string(*t.sender_choice));
  if (t.delivery_kind) j["delivery_kind"] = std::string(to_string(*t.delivery_kind));
  if (t.delivered_text) j["delivered_text"] = *t.delivered_text;
  if (t.delivering_at) j["delivering_at_ns"] = ns(*t.delivering_at);
  if (t.error_notice) j["error"] = *t.error_notice;
  return j;
}

TranscriptEntry transcript_entry_from_json(const json& j) {
  TranscriptEntry e;
  e.session_id = str(j, "session");
  auto& t = e.turn;
  auto& u = t.utterance;
  auto id = parse_turn_id(str(j, "turn"));
  if (!id) throw ParseError("bad turn id");
  u.id = *id;
  u.speaker = parse_enum<Role>(j, "speaker", parse_role);
  u.source_lang = str(j, "source_lang");
  u.target_lang = str(j, "target_lang");
  u.source_text = str(j, "source_text");
  u.translated_text = opt_str(j, "translated_text");
  u.audio_ref = opt_str(j, "audio_ref");
  u.received_at = nanos(j, "received_at_ns");
  if (j.contains("analysis")) {
    const auto& a = j["analysis"];
    NormAnalysis na;
    na.category.name = str(a, "category");
    const auto& idx = field(a, "category_index");
    if (!idx.is_number_unsigned()) throw ParseError("field `category_index` must be unsigned");
    na.category.index = idx.get<std::size_t>();
    const auto& v = field(a, "violated");
    if (!v.is_boolean()) throw ParseError("field `violated` must be a boolean");
    na.violated = v.get<bool>();
    if (a.contains("impact")) na.impact = parse_enum<Impact>(a, "impact", parse_impact);
    t.analysis = na;
  }
  if (j.contains("bundle")) {
    const auto& b = j["bundle"];
    CorrectionBundle cb;
    cb.translation = str(b, "translation");
    cb.remediation = str(b, "remediation");
    cb.justification = str(b, "justification");
    cb.remediation_provenance = parse_provenance(str(b, "remediation_provenance"));
    cb.justification_provenance = parse_provenance(str(b, "justification_provenance"));
    t.bundle = cb;
  }
  if (j.contains("sender_choice")) {
    t.sender_choice = parse_enum<SenderChoice>(j, "sender_choice", parse_sender_choice);
  }
  if (j.contains("delivery_kind")) {
    t.delivery_kind = parse_enum<DeliveryKind>(j, "delivery_kind", parse_delivery_kind);
  }
  t.delivered_text = opt_str(j, "delivered_text");
  if (j.contains("delivering_at_ns")) t.delivering_at = nanos(j, "delivering_at_ns");
  t.error_notice = opt_str(j, "error");
  return e;
}

void write_transcript(std::ostream& out, const std::vector<TranscriptEntry>& entries) {
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
}

std::vector<TranscriptEntry> read_transcript(std::istream& in) {
  std::vector<TranscriptEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(transcript_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(n) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace nb
