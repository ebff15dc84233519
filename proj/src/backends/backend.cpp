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

#include "normbridge/backends/backend.hpp"

namespace nb::backends {

std::string_view to_string(Task t) noexcept {
  switch (t) {
    case Task::ASR: return "ASR";
    case Task::MT: return "MT";
    case Task::CategoryCls: return "CategoryCls";
    case Task::ViolationCls: return "ViolationCls";
    case Task::ImpactCls: return "ImpactCls";
    case Task::RemediationGen: return "RemediationGen";
    case Task::JustificationGen: return "JustificationGen";
  }
  return "?";
}

std::string_view config_key(Task t) noexcept {
  switch (t) {
    case Task::ASR: return "asr";
    case Task::MT: return "mt";
    case Task::CategoryCls: return "category";
    case Task::ViolationCls: return "violation";
    case Task::ImpactCls: return "impact";
    case Task::RemediationGen: return "remediation";
    case Task::JustificationGen: return "justification";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view s) noexcept {
  for (Task t : kAllTasks) {
    if (s == config_key(t) || s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::string_view to_string(BackendKind k) noexcept {
  switch (k) {
    case BackendKind::RemoteHTTP: return "remote_http";
    case BackendKind::LocalStub: return "local_stub";
    case BackendKind::RuleBased: return "rule_based";
  }
  return "?";
}

void StageDelays::set(Task t, Duration d) {
  std::lock_guard lock(mu_);
  delays_[t] = d;
}

void StageDelays::clear() {
  std::lock_guard lock(mu_);
  delays_.clear();
}

std::optional<Duration> StageDelays::get(Task t) const {
  std::lock_guard lock(mu_);
  auto it = delays_.find(t);
  if (it == delays_.end()) return std::nullopt;
  return it->second;
}

void StubBackend::set_faults(const FaultInjection& f) {
  std::lock_guard lock(rng_mu_);
  faults_ = f;
  rng_.seed(f.seed);
}

Duration StubBackend::delay_for(Task t) const {
  if (stage_delays_) {
    if (auto d = stage_delays_->get(t)) return *d;
  }
  return delay_;
}

void StubBackend::invoke(const BackendRequest& request, Executor& exec,
                         Completion done) {
  bool inject = false;
  FaultMode mode = FaultMode::Error;
  {
    std::lock_guard lock(rng_mu_);
    if (faults_.fail_rate > 0.0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      inject = u(rng_) < faults_.fail_rate;
      mode = faults_.mode;
    }
  }
  if (inject && mode == FaultMode::Hang) return;  // never answers

  Outcome out = inject ? Outcome::fail("injected fault in " + describe())
                       : compute(request);
  const Duration d = inject ? Duration::zero() : delay_for(request.task);
  exec.post_after(d, [done = std::move(done), out = std::move(out)]() mutable {
    done(std::move(out));
  });
}

const std::string& analysed_text(const Utterance& u) {
  return u.translated_text ? *u.translated_text : u.source_text;
}

}  // namespace nb::backends
