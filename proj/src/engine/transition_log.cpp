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

#include "normbridge/engine/transition_log.hpp"

#include <charconv>
#include <cstdio>

#include "normbridge/core/error.hpp"

namespace nb {

namespace {

std::optional<EngineState> parse_state(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(EngineState::Faulted); ++i) {
    auto st = static_cast<EngineState>(i);
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::optional<EventKind> parse_event(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(EventKind::DeliveryAcked); ++i) {
    auto k = static_cast<EventKind>(i);
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

}  // namespace

std::string format_transition(const TransitionRecord& r) {
  char ms[64];
  std::snprintf(ms, sizeof ms, "%.3f", to_ms(r.elapsed));
  std::string line = r.session_id;
  line += '\t';
  line += format_turn_id(r.turn_id);
  line += '\t';
  line += to_string(r.from);
  line += '\t';
  line += to_string(r.event);
  line += '\t';
  line += to_string(r.to);
  line += '\t';
  line += ms;
  return line;
}

TransitionRecord parse_transition(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (cols.size() != 6) throw ParseError("expected 6 tab-separated columns");
  TransitionRecord r;
  r.session_id = std::string(cols[0]);
  auto id = parse_turn_id(cols[1]);
  auto from = parse_state(cols[2]);
  auto ev = parse_event(cols[3]);
  auto to = parse_state(cols[4]);
  if (!id || !from || !ev || !to) throw ParseError("unknown turn id, state or event");
  double ms = 0.0;
  auto [ptr, ec] = std::from_chars(cols[5].data(), cols[5].data() + cols[5].size(), ms);
  if (ec != std::errc{} || ptr != cols[5].data() + cols[5].size()) {
    throw ParseError("bad elapsed_ms");
  }
  r.turn_id = *id;
  r.from = *from;
  r.event = *ev;
  r.to = *to;
  r.elapsed = std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::milli>(ms));
  return r;
}

std::vector<TransitionRecord> read_transition_log(std::istream& in) {
  std::vector<TransitionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_transition(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LatencyRecord> latencies_from_log(const std::vector<TransitionRecord>& log) {
  std::vector<LatencyRecord> out;
  for (const auto& r : log) {
    if (r.to != EngineState::Delivering) continue;
    LatencyRecord rec;
    rec.turn_id = r.turn_id;
    rec.elapsed = r.elapsed;
    if (r.from == EngineState::Analyzing) {
      rec.path = LatencyPath::NoRemediation;
    } else if (r.from == EngineState::Generating) {
      rec.path = LatencyPath::LowImpact;
    } else {
      rec.path = LatencyPath::HighImpact;
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace nb
