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

#include "normbridge/backends/remote.hpp"

#include <thread>

#include <httplib.h>

#include "normbridge/core/error.hpp"

namespace nb::backends {

using nlohmann::json;

RemoteHttpBackend::RemoteHttpBackend(std::string endpoint, Duration timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  const auto scheme = endpoint_.find("://");
  if (scheme == std::string::npos || endpoint_.compare(0, scheme, "http") != 0) {
    throw ConfigError("remote endpoint must be http://host:port/path: " + endpoint_);
  }
  const auto slash = endpoint_.find('/', scheme + 3);
  host_ = endpoint_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint_.substr(slash);
}

RemoteHttpBackend::~RemoteHttpBackend() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return in_flight_ == 0; });
}

json RemoteHttpBackend::request_body(const BackendRequest& request) {
  json body;
  body["task"] = std::string(config_key(request.task));
  body["context"] = json::array();
  for (const auto& u : request.context) body["context"].push_back(analysed_text(u));
  body["current"] = request.task == Task::MT || request.task == Task::ASR
                        ? request.current.source_text
                        : analysed_text(request.current);
  body["source_lang"] = request.current.source_lang;
  body["target_lang"] = request.current.target_lang;
  if (request.category) body["category"] = *request.category;
  if (request.remediation) body["remediation"] = *request.remediation;
  if (request.current.audio_ref) body["audio_ref"] = *request.current.audio_ref;
  return body;
}

BackendReply RemoteHttpBackend::parse_reply(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("reply is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw BackendError("reply is not a JSON object");
  BackendReply r;
  try {
    if (j.contains("label") && !j["label"].is_null()) {
      r.label = j["label"].is_string() ? j["label"].get<std::string>() : j["label"].dump();
    }
    if (j.contains("text") && !j["text"].is_null()) r.text = j["text"].get<std::string>();
    if (j.contains("probs") && !j["probs"].is_null()) {
      r.probs = j["probs"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed reply field: ") + e.what());
  }
  if (!r.label && !r.text && r.probs.empty()) {
    throw BackendError("reply has none of label, text, probs");
  }
  return r;
}

void RemoteHttpBackend::invoke(const BackendRequest& request, Executor& exec,
                               Completion done) {
  {
    std::lock_guard lock(mu_);
    ++in_flight_;
  }
  std::string body = request_body(request).dump();
  std::thread([this, &exec, body = std::move(body), done = std::move(done)]() mutable {
    Outcome out;
    try {
      httplib::Client client(host_);
      const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout_).count();
      const time_t sec = us / 1000000;
      const time_t usec = us % 1000000;
      client.set_connection_timeout(sec, usec);
      client.set_read_timeout(sec, usec);
      client.set_write_timeout(sec, usec);
      auto res = client.Post(path_, body, "application/json");
      if (!res) {
        out = Outcome::fail("HTTP transport error: " + httplib::to_string(res.error()));
      } else if (res->status != 200) {
        out = Outcome::fail("HTTP status " + std::to_string(res->status));
      } else {
        out = Outcome::ok(parse_reply(res->body));
      }
    } catch (const std::exception& e) {
      out = Outcome::fail(e.what());
    }
    exec.post([done = std::move(done), out = std::move(out)]() mutable {
      done(std::move(out));
    });
    std::lock_guard lock(mu_);
    --in_flight_;
    cv_.notify_all();
  }).detach();
}

}  // namespace nb::backends
