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

#include <string>
#include <string_view>
#include <vector>

namespace nb::backends {

/// Section labels recognised in combined generator output. Matching is
/// case-insensitive; a label must start a line and be followed by `:` (or
/// the full-width `：`).
struct GenerationGrammar {
  std::vector<std::string> remediation_labels{"remediation"};
  std::vector<std::string> justification_labels{"justification"};
};

struct ParsedGeneration {
  std::string remediation;
  std::string justification;
};

/// Splits labelled generator output into its remediation and justification,
/// in either order, with multi-line bodies. Throws ParseError unless both
/// sections are present and non-empty.
ParsedGeneration parse_generation(std::string_view raw,
                                  const GenerationGrammar& grammar = {});

/// True when `raw` contains at least one recognised section label.
bool has_generation_labels(std::string_view raw,
                           const GenerationGrammar& grammar = {});

}  // namespace nb::backends
