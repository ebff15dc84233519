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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "normbridge/backends/backend_set.hpp"
#include "normbridge/engine/engine.hpp"

namespace nb {

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
};

/// Throws ConfigError unless `host:port` with a port in 1..65535 (0 allowed
/// for an ephemeral port).
ListenAddress parse_listen(std::string_view s);

/// Service configuration. Relative paths are resolved against `base_dir`.
struct AppConfig {
  ListenAddress listen;
  CategorySet categories = CategorySet::defaults();
  EngineConfig engine;
  nlohmann::json backends = nlohmann::json::object();
  std::filesystem::path base_dir = ".";
  std::optional<std::filesystem::path> transcript_dir;
  std::optional<std::filesystem::path> static_dir;
  std::size_t offline_queue = 64;
  /// Fills in fault-injection seeds that backends leave unset.
  std::uint64_t seed = 0;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& path);

/// The backends section with every unset fault seed derived from `seed`.
nlohmann::json seeded_backends(const nlohmann::json& backends, std::uint64_t seed);

std::shared_ptr<backends::BackendSet> build_backends(
    const AppConfig& config, std::shared_ptr<const backends::StageDelays> delays = nullptr);

}  // namespace nb
