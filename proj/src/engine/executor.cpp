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

#include "normbridge/engine/executor.hpp"

#include <algorithm>
#include <chrono>

namespace nb {

namespace {

// Shared by every ThreadExecutor so timestamps from different sessions are
// comparable within one process.
const std::chrono::steady_clock::time_point kProcessEpoch =
    std::chrono::steady_clock::now();

Timestamp wall_now() {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() -
                                              kProcessEpoch);
}

}  // namespace

Timestamp VirtualExecutor::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualExecutor::post(Task task) { post_after(Duration::zero(), std::move(task)); }

Executor::TimerId VirtualExecutor::post_after(Duration delay, Task task) {
  std::lock_guard lock(mu_);
  if (delay < Duration::zero()) delay = Duration::zero();
  const TimerId id = next_id_++;
  const Key key{now_ + delay, id};
  queue_.emplace(key, std::move(task));
  index_.emplace(id, key);
  return id;
}

bool VirtualExecutor::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  queue_.erase(it->second);
  index_.erase(it);
  return true;
}

bool VirtualExecutor::run_one(Timestamp limit) {
  Task task;
  {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return false;
    auto it = queue_.begin();
    if (it->first.first > limit) return false;
    now_ = std::max(now_, it->first.first);
    task = std::move(it->second);
    index_.erase(it->first.second);
    queue_.erase(it);
  }
  task();
  return true;
}

std::size_t VirtualExecutor::run() {
  std::size_t n = 0;
  while (run_one(Timestamp::max())) ++n;
  return n;
}

std::size_t VirtualExecutor::run_until(Timestamp deadline) {
  std::size_t n = 0;
  while (run_one(deadline)) ++n;
  std::lock_guard lock(mu_);
  now_ = std::max(now_, deadline);
  return n;
}

bool VirtualExecutor::empty() const {
  std::lock_guard lock(mu_);
  return queue_.empty();
}

ThreadExecutor::ThreadExecutor() : worker_([this] { loop(); }) {}

ThreadExecutor::~ThreadExecutor() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

Timestamp ThreadExecutor::now() const { return wall_now(); }

void ThreadExecutor::post(Task task) { post_after(Duration::zero(), std::move(task)); }

Executor::TimerId ThreadExecutor::post_after(Duration delay, Task task) {
  TimerId id;
  {
    std::lock_guard lock(mu_);
    if (delay < Duration::zero()) delay = Duration::zero();
    id = next_id_++;
    const Key key{wall_now() + delay, id};
    queue_.emplace(key, std::move(task));
    index_.emplace(id, key);
  }
  cv_.notify_all();
  return id;
}

bool ThreadExecutor::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  queue_.erase(it->second);
  index_.erase(it);
  return true;
}

void ThreadExecutor::drain() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] {
    return !busy_ && (queue_.empty() || queue_.begin()->first.first > wall_now());
  });
}

void ThreadExecutor::loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (queue_.empty()) {
      idle_cv_.notify_all();
      cv_.wait(lock);
      continue;
    }
    auto due = queue_.begin()->first.first;
    if (due > wall_now()) {
      idle_cv_.notify_all();
      cv_.wait_for(lock, due - wall_now());
      continue;
    }
    auto it = queue_.begin();
    Task task = std::move(it->second);
    index_.erase(it->first.second);
    queue_.erase(it);
    busy_ = true;
    lock.unlock();
    task();
    lock.lock();
    busy_ = false;
  }
  idle_cv_.notify_all();
}

}  // namespace nb
