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

#include "normbridge/app/replay.hpp"

#include <spdlog/spdlog.h>

#include "normbridge/middleware/hub.hpp"
#include "normbridge/middleware/loopback.hpp"

namespace nb {

namespace {

class Recorder : public EngineObserver {
 public:
  std::function<void(const std::string&, const DialogueTurn&)> completed;
  ReplayResult* result = nullptr;

  void on_transition(const TransitionRecord& r) override { result->transitions.push_back(r); }
  void on_turn_completed(const std::string& session, const DialogueTurn& turn) override {
    result->transcript.push_back({session, turn});
    if (turn.error_notice) {
      ++result->faulted;
    } else if (turn.delivering_at) {
      result->latencies.push_back(record_latency(turn));
    }
    if (completed) completed(session, turn);
  }
};

}  // namespace

ReplayResult replay(const std::vector<ScriptedDialogue>& script, const AppConfig& config) {
  ReplayResult result;
  auto exec = std::make_shared<VirtualExecutor>();
  auto delays = std::make_shared<backends::StageDelays>();
  auto backend_set = build_backends(config, delays);

  Recorder recorder;
  recorder.result = &result;
  Hub hub(HubOptions{config.offline_queue});
  Engine engine(config.engine, backend_set, hub,
                [exec](const std::string&) { return exec; }, &recorder);
  hub.attach(&engine);

  std::vector<std::string> mismatched;
  for (const auto& dialogue : script) {
    const std::string& sid = dialogue.name;
    std::map<Role, std::shared_ptr<LoopbackClient>> clients;
    for (Role r : {Role::SME, Role::FLE}) {
      clients[r] = LoopbackClient::connect(hub, *exec, sid, r);
    }
    engine.session(sid)->set_languages(dialogue.langs);

    std::size_t next = 0;
    auto speak = [&] {
      if (next >= dialogue.steps.size()) return;
      const auto& step = dialogue.steps[next];
      delays->clear();
      for (const auto& [task, d] : step.delays) delays->set(task, d);
      clients[step.speaker]->say(step.text);
    };

    for (auto& [role, client] : clients) {
      client->on_message([&, c = client.get()](const wire::WireMessage& m) {
        if (m.type != wire::MessageType::correction_prompt) return;
        const auto id = parse_turn_id(m.turn_id.value_or(""));
        if (!id || *id == 0 || *id > dialogue.steps.size()) return;
        const auto& step = dialogue.steps[*id - 1];
        if (!step.choice) {
          ++result.unscripted_prompts;
          spdlog::warn("[{}] {} prompted without a scripted choice (line {}); letting it time out",
                       sid, *m.turn_id, step.line);
          return;
        }
        if (*step.choice != SenderChoice::TimedOut) c->choose(*id, *step.choice);
      });
    }

    recorder.completed = [&](const std::string& session, const DialogueTurn& turn) {
      if (session != sid) return;
      const auto& step = dialogue.steps[turn.id() - 1];
      if (step.choice && !turn.sender_choice) {
        mismatched.push_back(sid + "/" + format_turn_id(turn.id()));
      }
      ++next;
      exec->post(speak);
    };

    for (auto& [_, client] : clients) client->hello();
    exec->run();
    speak();
    exec->run();
    recorder.completed = nullptr;
    for (auto& [_, client] : clients) client->disconnect();

    if (next != dialogue.steps.size()) {
      throw Error(fmt::format("dialogue {} stalled after {} of {} steps", sid, next,
                              dialogue.steps.size()));
    }
  }
  delays->clear();

  if (!mismatched.empty()) {
    std::string list;
    for (const auto& t : mismatched) list += (list.empty() ? "" : ", ") + t;
    throw ScriptMismatch("scripted choice without a correction prompt: " + list,
                         std::move(mismatched));
  }
  result.choices = eval::choice_stats([&] {
    std::vector<DialogueTurn> turns;
    for (const auto& e : result.transcript) turns.push_back(e.turn);
    return turns;
  }());
  result.latency_means = eval::latency_means(result.latencies);
  result.simulated = exec->now();
  return result;
}

}  // namespace nb
