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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "normbridge/backends/backend.hpp"
#include "normbridge/backends/fallback.hpp"
#include "normbridge/backends/generation.hpp"
#include "normbridge/core/types.hpp"

namespace nb::backends {

template <class T>
struct Result {
  std::optional<T> value;
  std::string error;

  bool ok() const noexcept { return value.has_value(); }
};

template <class T>
using Callback = std::function<void(Result<T>)>;

struct TextOutcome {
  std::string text;
  /// Set when a generator returned labelled remediation + justification.
  std::optional<std::string> justification;
  Provenance provenance = Provenance::PrimaryBackend;
  Duration latency{};
};

struct CategoryOutcome {
  NormCategory category;
  std::vector<double> probs;  // over the 8 categories
  Provenance provenance = Provenance::PrimaryBackend;
};

struct ViolationOutcome {
  bool violated = false;
  std::vector<double> probs;  // {adheres, violates}
  Provenance provenance = Provenance::PrimaryBackend;
};

struct ImpactOutcome {
  Impact impact = Impact::Low;
  std::vector<double> probs;  // {Low, High}
  Provenance provenance = Provenance::PrimaryBackend;
};

/// Default per-task primary timeout.
Duration default_timeout(Task t);

/// Per-task routes plus typed wrappers that validate and decode replies.
/// Every wrapper applies the primary/backup fallback policy.
class BackendSet {
 public:
  explicit BackendSet(CategorySet categories, GenerationGrammar grammar = {});

  /// Builds routes from the `backends` section of a config. Relative paths
  /// resolve against `base_dir`. Tasks that are not mentioned get local stubs.
  static std::shared_ptr<BackendSet> from_config(
      const nlohmann::json& backends, const std::filesystem::path& base_dir,
      CategorySet categories, const LanguagePair& langs,
      std::shared_ptr<const StageDelays> stage_delays = nullptr,
      GenerationGrammar grammar = {});

  void set_route(TaskRoute route);
  const TaskRoute& route(Task t) const;
  const CategorySet& categories() const noexcept { return categories_; }
  FallbackStats& stats() noexcept { return stats_; }

  void transcribe(const Utterance& current, Executor& exec, Callback<TextOutcome> done);
  void translate(const Utterance& current, Executor& exec, Callback<TextOutcome> done);
  void classify_category(std::vector<Utterance> context, const Utterance& current,
                         Executor& exec, Callback<CategoryOutcome> done);
  void detect_violation(std::vector<Utterance> context, const Utterance& current,
                        const NormCategory& category, Executor& exec,
                        Callback<ViolationOutcome> done);
  /// `window` ends with the current utterance.
  void classify_impact(std::vector<Utterance> window, Executor& exec,
                       Callback<ImpactOutcome> done);
  void generate_remediation(std::vector<Utterance> context, const Utterance& current,
                            const NormCategory& category, Executor& exec,
                            Callback<TextOutcome> done);
  void generate_justification(std::vector<Utterance> context, const Utterance& current,
                              const NormCategory& category, std::string remediation,
                              Executor& exec, Callback<TextOutcome> done);

  /// Decoders shared by the wrappers; they throw BackendError on bad replies.
  std::vector<double> decode_distribution(const BackendReply& reply,
                                          const std::vector<std::string>& labels) const;

  static const std::vector<std::string>& violation_labels();
  static const std::vector<std::string>& impact_labels();

 private:
  void call_text(Task task, BackendRequest request, Executor& exec,
                 Callback<TextOutcome> done, bool parse_combined);

  CategorySet categories_;
  GenerationGrammar grammar_;
  std::map<Task, TaskRoute> routes_;
  FallbackStats stats_;
};

}  // namespace nb::backends
