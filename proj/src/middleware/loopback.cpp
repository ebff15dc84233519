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

#include "normbridge/middleware/loopback.hpp"

#include <atomic>

namespace nb {

namespace {
std::atomic<std::uint64_t> next_loopback_id{1};
}

std::shared_ptr<LoopbackClient> LoopbackClient::connect(Hub& hub, Executor& exec,
                                                        std::string session, Role role) {
  auto c = std::make_shared<LoopbackClient>(next_loopback_id++, hub, exec,
                                            std::move(session), role);
  hub.on_open(c);
  return c;
}

LoopbackClient::LoopbackClient(std::uint64_t id, Hub& hub, Executor& exec,
                               std::string session, Role role)
    : id_(id), hub_(hub), exec_(exec), session_(std::move(session)), role_(role) {}

void LoopbackClient::send_text(std::string frame) {
  auto msg = wire::decode(frame);
  {
    std::lock_guard lock(mu_);
    frames_.push_back(std::move(frame));
    inbox_.push_back(msg);
  }
  if (handler_) {
    exec_.post([self = shared_from_this(), msg = std::move(msg)] {
      if (self->handler_) self->handler_(msg);
    });
  }
}

void LoopbackClient::close(std::string) {
  std::lock_guard lock(mu_);
  closed_ = true;
}

void LoopbackClient::send(wire::WireMessage msg) {
  msg.seq = next_seq_++;
  hub_.on_frame(shared_from_this(), wire::encode(msg));
}

void LoopbackClient::hello() { send(wire::hello(session_, role_)); }

void LoopbackClient::say(std::string text) { send(wire::speech(session_, role_, std::move(text))); }

void LoopbackClient::choose(TurnId turn, SenderChoice c) {
  send(wire::choice(session_, role_, turn, c));
}

void LoopbackClient::disconnect() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  hub_.on_close(id_);
}

std::vector<wire::WireMessage> LoopbackClient::inbox() const {
  std::lock_guard lock(mu_);
  return inbox_;
}

std::vector<std::string> LoopbackClient::raw_frames() const {
  std::lock_guard lock(mu_);
  return frames_;
}

bool LoopbackClient::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace nb
