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

#include "normbridge/app/script.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "normbridge/core/error.hpp"
#include "normbridge/eval/text.hpp"

namespace nb {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

LanguagePair parse_lang(const std::string& args, LanguagePair langs) {
  std::istringstream in(args);
  std::string item;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("expected ROLE=lang, got '" + item + "'");
    auto role = parse_role(item.substr(0, eq));
    const auto lang = item.substr(eq + 1);
    if (!role || lang.empty()) throw ParseError("expected ROLE=lang, got '" + item + "'");
    (*role == Role::SME ? langs.sme : langs.fle) = lang;
  }
  return langs;
}

ScriptStep parse_step(const std::string& line) {
  auto fields = split(line, '\t');
  if (fields.size() < 2) throw ParseError("expected SPEAKER<TAB>text");
  ScriptStep step;
  auto role = parse_role(fields[0]);
  if (!role) throw ParseError("unknown speaker '" + fields[0] + "'");
  step.speaker = *role;
  step.text = fields[1];
  if (trim(step.text).empty()) throw ParseError("empty utterance");
  for (std::size_t i = 2; i < fields.size(); ++i) {
    const auto& f = fields[i];
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + f + "'");
    const auto key = f.substr(0, eq);
    const auto value = f.substr(eq + 1);
    if (key == "choice") {
      if (step.choice) throw ParseError("duplicate choice");
      auto c = parse_sender_choice(value);
      if (!c) throw ParseError("choice must be translation, remediation or timeout");
      step.choice = c;
    } else if (key.rfind("delay.", 0) == 0) {
      auto task = backends::parse_task(key.substr(6));
      if (!task) throw ParseError("unknown stage in '" + key + "'");
      long long ms = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), ms);
      if (ec != std::errc{} || ptr != value.data() + value.size() || ms < 0) {
        throw ParseError("delay must be a non-negative integer of milliseconds");
      }
      step.delays[*task] = std::chrono::milliseconds(ms);
    } else {
      throw ParseError("unknown step attribute '" + key + "'");
    }
  }
  return step;
}

}  // namespace

std::vector<ScriptedDialogue> parse_script(std::istream& in) {
  std::vector<ScriptedDialogue> out;
  LanguagePair langs;
  bool open = false;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      if (trim(line).empty() || line.front() == '#') continue;
      eval::nfc(line);  // rejects invalid UTF-8
      if (line.front() == '@') {
        const auto sp = line.find_first_of(" \t");
        const auto directive = line.substr(0, sp);
        const auto args = sp == std::string::npos ? std::string{} : trim(line.substr(sp + 1));
        if (directive == "@lang") {
          langs = parse_lang(args, langs);
          if (open && out.back().steps.empty()) out.back().langs = langs;
        } else if (directive == "@dialogue") {
          out.push_back({args, langs, {}});
          open = true;
        } else {
          throw ParseError("unknown directive " + directive);
        }
        continue;
      }
      if (!open) {
        out.push_back({{}, langs, {}});
        open = true;
      }
      auto step = parse_step(line);
      step.line = n;
      out.back().steps.push_back(std::move(step));
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].name.empty()) out[i].name = "dialogue-" + std::to_string(i + 1);
    if (!names.insert(out[i].name).second) {
      throw ParseError("duplicate dialogue name '" + out[i].name + "'");
    }
  }
  return out;
}

std::vector<ScriptedDialogue> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open script " + path.string());
  return parse_script(in);
}

}  // namespace nb
