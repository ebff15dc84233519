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

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "normbridge/backends/backend.hpp"

namespace nb::backends {

/// Primary adapter for one task plus an optional backup.
struct TaskRoute {
  Task task = Task::ASR;
  std::shared_ptr<Backend> primary;
  Duration primary_timeout = std::chrono::seconds(3);
  std::shared_ptr<Backend> backup;
  Duration backup_timeout = std::chrono::seconds(3);
};

struct BackendResponse {
  Task task = Task::ASR;
  BackendReply payload;
  Provenance provenance = Provenance::PrimaryBackend;
  Duration latency{};
};

struct FallbackResult {
  std::optional<BackendResponse> response;
  std::string error;  // BothBackendsFailed message when response is empty

  bool ok() const noexcept { return response.has_value(); }
};

/// Rejects replies that are unusable for the task; returns the reason.
using ReplyValidator = std::function<std::optional<std::string>(const BackendReply&)>;

/// Counters for how each call was resolved, per task.
class FallbackStats {
 public:
  void record(Task t, std::optional<Provenance> p);
  std::size_t primary(Task t) const;
  std::size_t backup(Task t) const;
  std::size_t failed(Task t) const;
  std::size_t calls(Task t) const;
  void reset();

 private:
  struct Counters {
    std::atomic<std::size_t> primary{0}, backup{0}, failed{0};
  };
  std::array<Counters, 7> by_task_;
};

/// Calls the primary; if it errors, returns an invalid reply, or has not
/// answered within its timeout, the backup is called instead and its reply
/// is tagged BackupBackend. Late primary replies are ignored. Completion is
/// posted on `exec` exactly once.
void invoke_with_fallback(const TaskRoute& route, BackendRequest request,
                          Executor& exec, ReplyValidator validate,
                          std::function<void(FallbackResult)> done,
                          FallbackStats* stats = nullptr);

}  // namespace nb::backends
