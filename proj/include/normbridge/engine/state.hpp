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
#include <string_view>

namespace nb {

/// Pipeline stage of a session. Each backend call gets its own awaitable
/// stage so every transition can be driven and observed independently.
enum class EngineState : std::uint8_t {
  Idle,
  Transcribing,
  Translating,
  Analyzing,
  Generating,  // impact classification and remediation run concurrently here
  AwaitingChoice,
  Delivering,
  Faulted,
};

std::string_view to_string(EngineState s) noexcept;

}  // namespace nb
