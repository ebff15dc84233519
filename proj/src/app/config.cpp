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

#include "normbridge/app/config.hpp"

#include <charconv>
#include <functional>
#include <fstream>
#include <set>

#include "normbridge/core/error.hpp"

namespace nb {

using nlohmann::json;

ListenAddress parse_listen(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ConfigError("listen address must be host:port, got '" + std::string(s) + "'");
  }
  ListenAddress a;
  a.host = std::string(s.substr(0, colon));
  if (a.host.front() == '[' && a.host.back() == ']') a.host = a.host.substr(1, a.host.size() - 2);
  const auto port = s.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535) {
    throw ConfigError("invalid port in listen address '" + std::string(s) + "'");
  }
  a.port = static_cast<std::uint16_t>(value);
  return a;
}

namespace {

template <class T>
T typed(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key `") + key + "` has the wrong type");
  }
}

}  // namespace

AppConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "listen",         "categories",   "choice_timeout_ms", "timeout_delivery",
      "languages",      "context_turns", "show_low_impact_justification",
      "backends",       "transcript_dir", "static_dir",      "offline_queue",
      "seed"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown config key `" + item.key() + "`");
  }
  AppConfig c;
  c.base_dir = base_dir;
  if (j.contains("listen")) c.listen = parse_listen(typed<std::string>(j, "listen"));
  if (j.contains("categories")) {
    c.categories = CategorySet(typed<std::vector<std::string>>(j, "categories"));
  }
  if (j.contains("choice_timeout_ms")) {
    const auto ms = typed<long long>(j, "choice_timeout_ms");
    if (ms <= 0) throw ConfigError("choice_timeout_ms must be positive");
    c.engine.policy.timeout = std::chrono::milliseconds(ms);
  }
  if (j.contains("timeout_delivery")) {
    auto kind = parse_delivery_kind(typed<std::string>(j, "timeout_delivery"));
    if (!kind) throw ConfigError("timeout_delivery must be translation or remediation");
    c.engine.policy.delivery = *kind;
  }
  if (j.contains("languages")) {
    const auto& l = j["languages"];
    if (!l.is_object()) throw ConfigError("`languages` must be an object");
    for (const auto& item : l.items()) {
      if (item.key() != "SME" && item.key() != "FLE") {
        throw ConfigError("`languages` keys are SME and FLE");
      }
    }
    if (l.contains("SME")) c.engine.langs.sme = typed<std::string>(l, "SME");
    if (l.contains("FLE")) c.engine.langs.fle = typed<std::string>(l, "FLE");
  }
  if (j.contains("context_turns")) {
    c.engine.context_turns = typed<std::size_t>(j, "context_turns");
  }
  if (j.contains("show_low_impact_justification")) {
    c.engine.report_low_impact_justification =
        typed<bool>(j, "show_low_impact_justification");
  }
  if (j.contains("backends")) {
    if (!j["backends"].is_object()) throw ConfigError("`backends` must be an object");
    c.backends = j["backends"];
  }
  auto path_of = [&](const char* key) {
    std::filesystem::path p(typed<std::string>(j, key));
    return p.is_absolute() ? p : base_dir / p;
  };
  if (j.contains("transcript_dir")) c.transcript_dir = path_of("transcript_dir");
  if (j.contains("static_dir")) c.static_dir = path_of("static_dir");
  if (j.contains("offline_queue")) {
    c.offline_queue = typed<std::size_t>(j, "offline_queue");
    if (c.offline_queue == 0) throw ConfigError("offline_queue must be positive");
  }
  if (j.contains("seed")) c.seed = typed<std::uint64_t>(j, "seed");
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : ".");
}

json seeded_backends(const json& backends, std::uint64_t seed) {
  json out = backends;
  std::uint64_t n = 0;
  // Derive a distinct seed per stub from its position in the config.
  std::function<void(json&)> walk = [&](json& spec) {
    if (!spec.is_object()) return;
    if (spec.contains("faults") && spec["faults"].is_object() &&
        !spec["faults"].contains("seed")) {
      spec["faults"]["seed"] = seed * 1000003u + n;
    }
    ++n;
    for (const char* nested : {"discrete", "probabilistic"}) {
      if (spec.contains(nested)) walk(spec[nested]);
    }
  };
  if (out.is_object()) {
    for (auto& [_, entry] : out.items()) {
      if (!entry.is_object()) continue;
      for (const char* slot : {"primary", "backup"}) {
        if (entry.contains(slot)) walk(entry[slot]);
      }
    }
  }
  return out;
}

std::shared_ptr<backends::BackendSet> build_backends(
    const AppConfig& config, std::shared_ptr<const backends::StageDelays> delays) {
  return backends::BackendSet::from_config(seeded_backends(config.backends, config.seed),
                                           config.base_dir, config.categories,
                                           config.engine.langs, std::move(delays));
}

}  // namespace nb
