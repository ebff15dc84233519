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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "normbridge/core/types.hpp"
#include "normbridge/engine/executor.hpp"

namespace nb::backends {

enum class Task : std::uint8_t {
  ASR,
  MT,
  CategoryCls,
  ViolationCls,
  ImpactCls,
  RemediationGen,
  JustificationGen,
};

inline constexpr Task kAllTasks[] = {Task::ASR,          Task::MT,
                                     Task::CategoryCls,  Task::ViolationCls,
                                     Task::ImpactCls,    Task::RemediationGen,
                                     Task::JustificationGen};

std::string_view to_string(Task t) noexcept;
/// Config key for a task: asr, mt, category, violation, impact, remediation,
/// justification.
std::string_view config_key(Task t) noexcept;
std::optional<Task> parse_task(std::string_view s) noexcept;

enum class BackendKind : std::uint8_t { RemoteHTTP, LocalStub, RuleBased };
std::string_view to_string(BackendKind k) noexcept;

struct BackendRequest {
  Task task = Task::ASR;
  /// Preceding utterances, oldest first.
  std::vector<Utterance> context;
  Utterance current;
  std::optional<std::string> category;
  std::optional<std::string> remediation;
};

/// Raw adapter output; which fields are meaningful depends on the task.
struct BackendReply {
  std::optional<std::string> label;
  std::optional<std::string> text;
  std::vector<double> probs;
};

struct Outcome {
  std::optional<BackendReply> reply;
  std::string error;

  static Outcome ok(BackendReply r) { return {std::move(r), {}}; }
  static Outcome fail(std::string e) { return {std::nullopt, std::move(e)}; }
  bool succeeded() const noexcept { return reply.has_value(); }
};

using Completion = std::function<void(Outcome)>;

/// An inference adapter. `invoke` must not block: results are delivered by
/// posting `done` onto `exec`, at most once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual void invoke(const BackendRequest& request, Executor& exec,
                      Completion done) = 0;
  virtual std::string describe() const = 0;
};

/// Per-task delay overrides shared with stub backends. Scripted replays set
/// these before each step to shape the simulated latency of every stage.
class StageDelays {
 public:
  void set(Task t, Duration d);
  void clear();
  std::optional<Duration> get(Task t) const;

 private:
  mutable std::mutex mu_;
  std::map<Task, Duration> delays_;
};

enum class FaultMode : std::uint8_t { Error, Hang };

struct FaultInjection {
  double fail_rate = 0.0;
  FaultMode mode = FaultMode::Error;
  std::uint64_t seed = 0;
};

/// Base for deterministic in-process adapters. `compute` is a pure function
/// of the request; delays and injected faults are layered on top.
class StubBackend : public Backend {
 public:
  void invoke(const BackendRequest& request, Executor& exec,
              Completion done) override;

  void set_delay(Duration d) { delay_ = d; }
  void set_faults(const FaultInjection& f);
  void set_stage_delays(std::shared_ptr<const StageDelays> d) {
    stage_delays_ = std::move(d);
  }
  Duration delay_for(Task t) const;

 protected:
  virtual Outcome compute(const BackendRequest& request) const = 0;

 private:
  Duration delay_{};
  FaultInjection faults_;
  std::mt19937_64 rng_;
  std::shared_ptr<const StageDelays> stage_delays_;
  std::mutex rng_mu_;
};

/// Text a classifier or generator should look at: the translation when the
/// utterance has one, else its source text.
const std::string& analysed_text(const Utterance& u);

}  // namespace nb::backends
