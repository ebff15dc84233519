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

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "normbridge/core/types.hpp"

namespace nb {

/// Serial task queue with timers. Every session's events run on exactly one
/// executor, so state transitions for a session never interleave.
class Executor {
 public:
  using Task = std::function<void()>;
  using TimerId = std::uint64_t;

  virtual ~Executor() = default;

  virtual Timestamp now() const = 0;
  virtual void post(Task task) = 0;
  virtual TimerId post_after(Duration delay, Task task) = 0;
  /// Returns false when the timer already fired or was never scheduled.
  virtual bool cancel(TimerId id) = 0;
};

/// Discrete-event executor over simulated time. Tasks are ordered by
/// (due time, submission order); `run` advances the clock instantly, so
/// multi-second backend delays cost nothing and replays are reproducible.
class VirtualExecutor final : public Executor {
 public:
  Timestamp now() const override;
  void post(Task task) override;
  TimerId post_after(Duration delay, Task task) override;
  bool cancel(TimerId id) override;

  /// Runs until the queue is empty. Returns the number of tasks executed.
  std::size_t run();
  /// Runs every task due at or before `deadline`, then sets the clock to it.
  std::size_t run_until(Timestamp deadline);
  bool empty() const;

 private:
  using Key = std::pair<Timestamp, TimerId>;
  bool run_one(Timestamp limit);

  mutable std::mutex mu_;
  Timestamp now_{};
  TimerId next_id_ = 1;
  std::map<Key, Task> queue_;
  std::map<TimerId, Key> index_;
};

/// Wall-clock executor backed by one worker thread.
class ThreadExecutor final : public Executor {
 public:
  ThreadExecutor();
  ~ThreadExecutor() override;
  ThreadExecutor(const ThreadExecutor&) = delete;
  ThreadExecutor& operator=(const ThreadExecutor&) = delete;

  Timestamp now() const override;
  void post(Task task) override;
  TimerId post_after(Duration delay, Task task) override;
  bool cancel(TimerId id) override;

  /// Blocks until every task due now has run. Pending timers are left alone.
  void drain();

 private:
  using Key = std::pair<Timestamp, TimerId>;
  void loop();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  bool stopping_ = false;
  bool busy_ = false;
  TimerId next_id_ = 1;
  std::map<Key, Task> queue_;
  std::map<TimerId, Key> index_;
  std::thread worker_;
};

}  // namespace nb
