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

#include "normbridge/backends/fallback.hpp"

#include <spdlog/spdlog.h>

namespace nb::backends {

void FallbackStats::record(Task t, std::optional<Provenance> p) {
  auto& c = by_task_[static_cast<std::size_t>(t)];
  if (!p) {
    ++c.failed;
  } else if (*p == Provenance::PrimaryBackend) {
    ++c.primary;
  } else {
    ++c.backup;
  }
}

std::size_t FallbackStats::primary(Task t) const {
  return by_task_[static_cast<std::size_t>(t)].primary;
}
std::size_t FallbackStats::backup(Task t) const {
  return by_task_[static_cast<std::size_t>(t)].backup;
}
std::size_t FallbackStats::failed(Task t) const {
  return by_task_[static_cast<std::size_t>(t)].failed;
}
std::size_t FallbackStats::calls(Task t) const {
  return primary(t) + backup(t) + failed(t);
}
void FallbackStats::reset() {
  for (auto& c : by_task_) {
    c.primary = 0;
    c.backup = 0;
    c.failed = 0;
  }
}

namespace {

// All fields are touched only from callbacks running on `exec`.
struct Attempt {
  TaskRoute route;
  BackendRequest request;
  Executor& exec;
  ReplyValidator validate;
  std::function<void(FallbackResult)> done;
  FallbackStats* stats;
  Timestamp started{};
  bool primary_settled = false;
  bool backup_settled = false;
  Executor::TimerId primary_timer = 0;
  Executor::TimerId backup_timer = 0;
  std::string primary_error;

  Attempt(TaskRoute r, BackendRequest req, Executor& e, ReplyValidator v,
          std::function<void(FallbackResult)> d, FallbackStats* s)
      : route(std::move(r)), request(std::move(req)), exec(e),
        validate(std::move(v)), done(std::move(d)), stats(s) {}

  std::optional<std::string> check(const Outcome& o) const {
    if (!o.succeeded()) return o.error.empty() ? "backend error" : o.error;
    if (validate) return validate(*o.reply);
    return std::nullopt;
  }

  void finish(FallbackResult r) {
    if (stats) {
      stats->record(route.task, r.response ? std::optional(r.response->provenance)
                                           : std::nullopt);
    }
    done(std::move(r));
  }
};

void start_backup(const std::shared_ptr<Attempt>& a, std::string why) {
  a->primary_error = std::move(why);
  if (!a->route.backup) {
    a->finish({std::nullopt, "BothBackendsFailed: " + std::string(to_string(a->route.task)) +
                                 " primary failed (" + a->primary_error +
                                 ") and no backup is configured"});
    return;
  }
  spdlog::warn("{}: primary failed ({}), activating backup {}",
               to_string(a->route.task), a->primary_error, a->route.backup->describe());
  a->backup_timer = a->exec.post_after(a->route.backup_timeout, [a] {
    if (a->backup_settled) return;
    a->backup_settled = true;
    a->finish({std::nullopt, "BothBackendsFailed: " + std::string(to_string(a->route.task)) +
                                 " primary (" + a->primary_error +
                                 "), backup (timeout)"});
  });
  a->route.backup->invoke(a->request, a->exec, [a](Outcome o) {
    if (a->backup_settled) return;
    a->backup_settled = true;
    a->exec.cancel(a->backup_timer);
    if (auto bad = a->check(o)) {
      a->finish({std::nullopt, "BothBackendsFailed: " + std::string(to_string(a->route.task)) +
                                   " primary (" + a->primary_error + "), backup (" +
                                   *bad + ")"});
      return;
    }
    a->finish({BackendResponse{a->route.task, std::move(*o.reply),
                               Provenance::BackupBackend, a->exec.now() - a->started},
               {}});
  });
}

}  // namespace

void invoke_with_fallback(const TaskRoute& route, BackendRequest request,
                          Executor& exec, ReplyValidator validate,
                          std::function<void(FallbackResult)> done,
                          FallbackStats* stats) {
  request.task = route.task;
  auto a = std::make_shared<Attempt>(route, std::move(request), exec,
                                     std::move(validate), std::move(done), stats);
  a->started = exec.now();
  if (!route.primary) {
    exec.post([a] { start_backup(a, "no primary configured"); });
    return;
  }
  a->primary_timer = exec.post_after(route.primary_timeout, [a] {
    if (a->primary_settled) return;
    a->primary_settled = true;
    start_backup(a, "timeout");
  });
  route.primary->invoke(a->request, exec, [a](Outcome o) {
    if (a->primary_settled) return;
    a->primary_settled = true;
    a->exec.cancel(a->primary_timer);
    if (auto bad = a->check(o)) {
      start_backup(a, *bad);
      return;
    }
    a->finish({BackendResponse{a->route.task, std::move(*o.reply),
                               Provenance::PrimaryBackend, a->exec.now() - a->started},
               {}});
  });
}

}  // namespace nb::backends
