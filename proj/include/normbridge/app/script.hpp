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

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normbridge/backends/backend.hpp"
#include "normbridge/core/types.hpp"

namespace nb {

struct ScriptStep {
  Role speaker = Role::SME;
  std::string text;
  /// Expected only where a high-impact prompt arises. TimedOut means the
  /// sender lets the prompt expire.
  std::optional<SenderChoice> choice;
  std::map<backends::Task, Duration> delays;
  std::size_t line = 0;
};

struct ScriptedDialogue {
  std::string name;
  LanguagePair langs;
  std::vector<ScriptStep> steps;
};

/// Line-oriented UTF-8 script:
///
///   # comment
///   @lang SME=en FLE=zh
///   @dialogue optional-name
///   SME<TAB>text[<TAB>choice=translation|remediation|timeout][<TAB>delay.<task>=<ms>]...
///
/// Steps before the first `@dialogue` open an unnamed dialogue. `@lang`
/// applies to the current dialogue if it has no steps yet and to all later
/// ones. Throws ParseError naming the 1-based line.
std::vector<ScriptedDialogue> parse_script(std::istream& in);
std::vector<ScriptedDialogue> load_script(const std::filesystem::path& path);

}  // namespace nb
