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

namespace nb::eval {

/// NFC-normalises `text` and splits on whitespace. A string without any
/// whitespace that contains CJK characters is split per code point instead.
std::vector<std::string> tokenize(std::string_view text);

/// Unicode NFC normalisation. Throws PreconditionError on invalid UTF-8.
std::string nfc(std::string_view text);

}  // namespace nb::eval
