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

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "normbridge/backends/backend.hpp"

namespace nb::backends {

/// Adapter for an external inference service.
///
/// Request: `POST <path>` with JSON
///   {"task": "...", "context": ["..."], "current": "...",
///    "source_lang": "..", "target_lang": "..", "category"?: "..",
///    "remediation"?: "..", "audio_ref"?: ".."}
/// Reply: JSON object with any of `label`, `text`, `probs`.
///
/// Each call runs on its own thread; the completion is posted back onto the
/// caller's executor. The destructor waits for calls still in flight.
class RemoteHttpBackend final : public Backend {
 public:
  /// `endpoint` is `http://host:port/path`.
  RemoteHttpBackend(std::string endpoint, Duration timeout);
  ~RemoteHttpBackend() override;

  void invoke(const BackendRequest& request, Executor& exec,
              Completion done) override;
  std::string describe() const override { return "remote:" + endpoint_; }

  static nlohmann::json request_body(const BackendRequest& request);
  /// Throws BackendError when the body is not a usable reply object.
  static BackendReply parse_reply(std::string_view body);

 private:
  std::string endpoint_;
  std::string host_;  // scheme://host:port
  std::string path_;
  Duration timeout_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace nb::backends
