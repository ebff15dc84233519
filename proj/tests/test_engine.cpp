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


#include <doctest.h>

#include "helpers.hpp"
#include "normbridge/core/error.hpp"
#include "normbridge/eval/study.hpp"

using namespace nb;
using namespace std::chrono_literals;
using wire::MessageType;

namespace {

const char* kPlain = "Hello, we need the report tomorrow.";
const char* kLow = "Give me the samples today.";
const char* kHigh = "This price is nonsense.";

TurnId prompted_turn(const LoopbackClient& c) {
  auto p = nbt::Rig::of(c, MessageType::correction_prompt);
  REQUIRE(!p.empty());
  return *parse_turn_id(*p.back().turn_id);
}

}  // namespace

TEST_CASE("session becomes ready once both roles say hello") {
  nbt::Rig rig(nbt::instant_config());
  CHECK(rig.rec.ready == std::vector<std::string>{"s1"});
  auto acks = nbt::Rig::of(*rig.sme, MessageType::ack);
  REQUIRE(acks.size() == 1);
  CHECK(acks[0].body["registered"] == "SME");
  CHECK(acks[0].body["v"] == 1);
}

TEST_CASE("non-violating speech reaches the receiver as a translation") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kPlain);
  rig.exec->run();

  REQUIRE(rig.rec.turns.size() == 1);
  const auto& turn = rig.rec.turns[0];
  CHECK_FALSE(turn.analysis->violated);
  CHECK(turn.delivery_kind == DeliveryKind::Translation);

  auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
  REQUIRE(d.size() == 1);
  CHECK(d[0].body["text"] == *turn.utterance.translated_text);
  CHECK(d[0].turn_id == "t1");
  CHECK(nbt::Rig::of(*rig.sme, MessageType::deliver).empty());

  CHECK(nbt::Rig::of(*rig.sme, MessageType::transcript).at(0).body["text"] == kPlain);
  CHECK(nbt::Rig::of(*rig.sme, MessageType::translation).size() == 1);
  auto acks = nbt::Rig::of(*rig.sme, MessageType::ack);
  REQUIRE(acks.size() == 2);
  CHECK(acks[1].body["delivered"] == "translation");

  auto& state = rig.engine->find("s1")->state();
  CHECK(state.fsm_state == EngineState::Idle);
  CHECK(state.history.size() == 1);
  CHECK_FALSE(state.pending);
}

TEST_CASE("low-impact violation delivers the remediation") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kLow);
  rig.exec->run();
  REQUIRE(rig.rec.turns.size() == 1);
  const auto& turn = rig.rec.turns[0];
  REQUIRE(turn.analysis->violated);
  CHECK(turn.analysis->impact == Impact::Low);
  auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
  REQUIRE(d.size() == 1);
  CHECK(d[0].body["text"] == turn.bundle->remediation);
  CHECK(d[0].body["text"] != turn.bundle->translation);
  CHECK(nbt::Rig::of(*rig.sme, MessageType::correction_prompt).empty());
  CHECK_FALSE(check_turn_invariants(turn));
}

TEST_CASE("high-impact violation prompts the sender") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kHigh);
  rig.exec->run_until(rig.exec->now() + 1s);

  auto prompts = nbt::Rig::of(*rig.sme, MessageType::correction_prompt);
  REQUIRE(prompts.size() == 1);
  const auto& body = prompts[0].body;
  CHECK(body.contains("translation"));
  CHECK(!body["remediation"].get<std::string>().empty());
  CHECK(!body["justification"].get<std::string>().empty());
  CHECK(body["timeout_ms"] == 60000);
  CHECK(nbt::Rig::of(*rig.fle, MessageType::correction_prompt).empty());
  CHECK(nbt::Rig::of(*rig.fle, MessageType::deliver).empty());

  SUBCASE("remediation picked") {
    rig.sme->choose(prompted_turn(*rig.sme), SenderChoice::Remediation);
    rig.exec->run();
    auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
    REQUIRE(d.size() == 1);
    CHECK(d[0].body["text"] == body["remediation"]);
    CHECK(rig.rec.turns.at(0).sender_choice == SenderChoice::Remediation);
  }
  SUBCASE("translation picked") {
    rig.sme->choose(prompted_turn(*rig.sme), SenderChoice::Translation);
    rig.exec->run();
    auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
    REQUIRE(d.size() == 1);
    CHECK(d[0].body["text"] == body["translation"]);
  }
  SUBCASE("no answer times out to the translation") {
    rig.exec->run();
    auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
    REQUIRE(d.size() == 1);
    CHECK(d[0].body["text"] == body["translation"]);
    CHECK(rig.rec.turns.at(0).sender_choice == SenderChoice::TimedOut);
  }
  SUBCASE("the receiver may not choose") {
    rig.fle->choose(prompted_turn(*rig.sme), SenderChoice::Remediation);
    rig.exec->run_until(rig.exec->now() + 1s);
    auto errs = nbt::Rig::of(*rig.fle, MessageType::error);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].body["code"] == "not_sender");
    CHECK(rig.engine->find("s1")->state().fsm_state == EngineState::AwaitingChoice);
  }
  SUBCASE("a choice for another turn is stale") {
    rig.sme->choose(prompted_turn(*rig.sme) + 7, SenderChoice::Remediation);
    rig.exec->run_until(rig.exec->now() + 1s);
    auto errs = nbt::Rig::of(*rig.sme, MessageType::error);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].body["code"] == "stale_choice");
  }
}

TEST_CASE("timeout policy can deliver the remediation") {
  auto cfg = nbt::instant_config();
  cfg.engine.policy.delivery = DeliveryKind::Remediation;
  cfg.engine.policy.timeout = 5s;
  nbt::Rig rig(cfg);
  rig.sme->say(kHigh);
  rig.exec->run();
  const auto& turn = rig.rec.turns.at(0);
  CHECK(turn.sender_choice == SenderChoice::TimedOut);
  CHECK(turn.delivered_text == turn.bundle->remediation);
  CHECK(*turn.delivering_at - turn.utterance.received_at == 5s);
}

TEST_CASE("a choice one tick before the timeout wins") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kHigh);
  rig.exec->run_until(rig.exec->now() + 1s);
  const auto prompt_at = rig.rec.transitions.back().elapsed;
  CHECK(rig.rec.transitions.back().to == EngineState::AwaitingChoice);
  const auto spoken_at = rig.engine->find("s1")->state().pending->utterance.received_at;
  rig.exec->run_until(spoken_at + prompt_at + 60s - 1ns);
  CHECK(rig.engine->find("s1")->state().fsm_state == EngineState::AwaitingChoice);
  rig.sme->choose(prompted_turn(*rig.sme), SenderChoice::Remediation);
  rig.exec->run();
  REQUIRE(rig.rec.turns.size() == 1);
  CHECK(rig.rec.turns[0].sender_choice == SenderChoice::Remediation);
  CHECK(rig.rec.rejected.empty());
  CHECK(rig.exec->empty());
}

TEST_CASE("speech during a turn is refused as busy") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kPlain);
  rig.fle->say("你好");
  rig.exec->run();
  auto errs = nbt::Rig::of(*rig.fle, MessageType::error);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].body["code"] == "busy");
  CHECK(rig.rec.turns.size() == 1);

  rig.fle->say("你好");
  rig.exec->run();
  REQUIRE(rig.rec.turns.size() == 2);
  CHECK(rig.rec.turns[1].id() == 2);
  CHECK(rig.rec.turns[1].sender() == Role::FLE);
}

TEST_CASE("sender disconnecting while a choice is pending") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kHigh);
  rig.exec->run_until(rig.exec->now() + 1s);
  rig.sme->disconnect();
  rig.exec->run();
  REQUIRE(rig.rec.turns.size() == 1);
  CHECK(rig.rec.turns[0].sender_choice == SenderChoice::TimedOut);
  CHECK(nbt::Rig::of(*rig.fle, MessageType::deliver).size() == 1);
  CHECK(rig.hub.queued("s1", Role::SME) == 1);

  auto again = LoopbackClient::connect(rig.hub, *rig.exec, "s1", Role::SME);
  again->hello();
  auto in = again->inbox();
  REQUIRE(in.size() == 2);
  CHECK(in[1].type == MessageType::ack);
  CHECK(in[1].body["delivered"] == "translation");
  CHECK(rig.hub.queued("s1", Role::SME) == 0);
}

TEST_CASE("generation failure faults the turn but keeps the conversation going") {
  auto cfg = nbt::instant_config();
  auto backends = build_backends(cfg);
  backends->set_route({backends::Task::RemediationGen, nbt::FakeBackend::failing(), 3s, nullptr, 3s});
  nbt::Rig rig(cfg.engine, backends);

  rig.sme->say(kLow);
  rig.exec->run();
  REQUIRE(rig.rec.turns.size() == 1);
  const auto& turn = rig.rec.turns[0];
  CHECK(turn.error_notice);
  CHECK(turn.delivery_kind == DeliveryKind::Translation);
  auto d = nbt::Rig::of(*rig.fle, MessageType::deliver);
  REQUIRE(d.size() == 1);
  CHECK(d[0].body["text"] == *turn.utterance.translated_text);
  auto errs = nbt::Rig::of(*rig.sme, MessageType::error);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].body["code"] == "backend_error");
  CHECK(rig.engine->find("s1")->latencies().empty());

  rig.sme->say(kPlain);
  rig.exec->run();
  CHECK(rig.rec.turns.size() == 2);
  CHECK_FALSE(rig.rec.turns[1].error_notice);
  CHECK(rig.engine->find("s1")->state().history.size() == 2);
}

TEST_CASE("asr failure discards the turn") {
  auto cfg = nbt::instant_config();
  auto backends = build_backends(cfg);
  backends->set_route({backends::Task::ASR, nbt::FakeBackend::failing(), 3s, nullptr, 3s});
  nbt::Rig rig(cfg.engine, backends);
  rig.sme->say(kPlain);
  rig.exec->run();
  CHECK(nbt::Rig::of(*rig.fle, MessageType::deliver).empty());
  CHECK(rig.engine->find("s1")->state().history.empty());
  CHECK(rig.engine->find("s1")->state().fsm_state == EngineState::Idle);
}

TEST_CASE("impact classifier sees two preceding utterances") {
  auto cfg = nbt::instant_config();
  auto backends = build_backends(cfg);
  auto impact = std::make_shared<nbt::FakeBackend>([](const backends::BackendRequest&) {
    backends::BackendReply r;
    r.label = "Low";
    return backends::Outcome::ok(r);
  });
  backends->set_route({backends::Task::ImpactCls, impact, 3s, nullptr, 3s});
  nbt::Rig rig(cfg.engine, backends);

  rig.sme->say(kLow);
  rig.exec->run();
  REQUIRE(impact->calls == 1);
  CHECK(impact->last.context.empty());

  for (const char* s : {kPlain, "Thank you.", kLow}) {
    rig.sme->say(s);
    rig.exec->run();
  }
  REQUIRE(impact->calls == 2);
  REQUIRE(impact->last.context.size() == 2);
  CHECK(impact->last.context[0].source_text == kPlain);
  CHECK(impact->last.context[1].source_text == "Thank you.");
  CHECK(impact->last.current.source_text == kLow);
}

TEST_CASE("configured stub delays set the latency per path") {
  nbt::Rig rig(nbt::stub_config());
  for (const char* s : {kPlain, kLow, kPlain, kLow}) {
    rig.sme->say(s);
    rig.exec->run();
  }
  auto means = eval::latency_means(rig.engine->find("s1")->latencies());
  CHECK(means.at(LatencyPath::NoRemediation) == 1500ms);
  CHECK(means.at(LatencyPath::LowImpact) == 6700ms);
  CHECK_FALSE(means.contains(LatencyPath::HighImpact));
}

TEST_CASE("transitions are observed in pipeline order") {
  nbt::Rig rig(nbt::instant_config());
  rig.sme->say(kLow);
  rig.exec->run();
  std::vector<EngineState> to;
  for (const auto& t : rig.rec.transitions) to.push_back(t.to);
  CHECK(to == std::vector<EngineState>{EngineState::Transcribing, EngineState::Translating,
                                       EngineState::Analyzing, EngineState::Generating,
                                       EngineState::Delivering, EngineState::Idle});
}

TEST_CASE("sessions progress independently") {
  auto cfg = nbt::instant_config();
  nbt::Rig rig(cfg);
  auto b_sme = LoopbackClient::connect(rig.hub, *rig.exec, "s2", Role::SME);
  auto b_fle = LoopbackClient::connect(rig.hub, *rig.exec, "s2", Role::FLE);
  b_sme->hello();
  b_fle->hello();
  rig.sme->say(kHigh);
  b_sme->say(kPlain);
  rig.exec->run_until(rig.exec->now() + 1s);
  CHECK(nbt::Rig::of(*b_fle, MessageType::deliver).size() == 1);
  CHECK(nbt::Rig::of(*rig.fle, MessageType::deliver).empty());
  CHECK(rig.engine->session_ids() == std::vector<std::string>{"s1", "s2"});
}

TEST_CASE("languages follow the speaker") {
  nbt::Rig rig(nbt::instant_config());
  rig.fle->say("你好");
  rig.exec->run();
  const auto& u = rig.rec.turns.at(0).utterance;
  CHECK(u.source_lang == "zh");
  CHECK(u.target_lang == "en");
  CHECK(u.translated_text == "hello");

  rig.engine->find("s1")->set_languages({"de", "fr"});
  rig.sme->say("x");
  rig.exec->run();
  CHECK(rig.rec.turns.at(1).utterance.source_lang == "de");
}
