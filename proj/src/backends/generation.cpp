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

#include "normbridge/backends/generation.hpp"

#include <optional>
#include <regex>

#include "normbridge/core/error.hpp"

namespace nb::backends {

namespace {

std::string escape_regex(std::string_view s) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string alternation(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += '|';
    out += escape_regex(l);
  }
  return out;
}

// Group 1 matches a remediation label, group 2 a justification label.
std::regex label_regex(const GenerationGrammar& g) {
  const std::string pattern = "(?:^|\\n)[ \\t]*[*#_]*[ \\t]*(?:(" +
                              alternation(g.remediation_labels) + ")|(" +
                              alternation(g.justification_labels) +
                              "))[*_]*[ \\t]*(?::|\xEF\xBC\x9A)";
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ParsedGeneration parse_generation(std::string_view raw,
                                  const GenerationGrammar& grammar) {
  if (raw.empty()) throw ParseError("empty generation output");
  const std::string text(raw);
  const std::regex re = label_regex(grammar);

  struct Mark {
    bool remediation;
    std::size_t label_start;
    std::size_t body_start;
  };
  std::vector<Mark> marks;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    marks.push_back({m[1].matched, static_cast<std::size_t>(m.position(0)),
                     static_cast<std::size_t>(m.position(0) + m.length(0))});
  }

  std::optional<std::string> remediation, justification;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const std::size_t end = i + 1 < marks.size() ? marks[i + 1].label_start : text.size();
    auto body = trim(std::string_view(text).substr(marks[i].body_start,
                                                   end - marks[i].body_start));
    auto& slot = marks[i].remediation ? remediation : justification;
    if (!slot) slot = std::move(body);  // first occurrence wins
  }
  if (!remediation || remediation->empty()) {
    throw ParseError("generation output has no remediation section");
  }
  if (!justification || justification->empty()) {
    throw ParseError("generation output has no justification section");
  }
  return {std::move(*remediation), std::move(*justification)};
}

bool has_generation_labels(std::string_view raw, const GenerationGrammar& grammar) {
  const std::string text(raw);
  return std::regex_search(text, label_regex(grammar));
}

}  // namespace nb::backends
