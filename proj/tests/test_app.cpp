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

#include <sstream>

#include "helpers.hpp"
#include "normbridge/app/config.hpp"
#include "normbridge/app/replay.hpp"
#include "normbridge/app/script.hpp"
#include "normbridge/app/transcript.hpp"
#include "normbridge/core/error.hpp"

using namespace nb;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

std::vector<ScriptedDialogue> script(const std::string& text) {
  std::istringstream in(text);
  return parse_script(in);
}

std::string transcript_bytes(const ReplayResult& r) {
  std::ostringstream out;
  write_transcript(out, r.transcript);
  for (const auto& t : r.transitions) out << format_transition(t) << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("listen addresses") {
  auto a = parse_listen("0.0.0.0:9000");
  CHECK(a.host == "0.0.0.0");
  CHECK(a.port == 9000);
  CHECK(parse_listen("localhost:0").port == 0);
  CHECK_THROWS_AS(parse_listen("9000"), ConfigError);
  CHECK_THROWS_AS(parse_listen("host:70000"), ConfigError);
  CHECK_THROWS_AS(parse_listen("host:x"), ConfigError);
  CHECK_THROWS_AS(parse_listen(":80"), ConfigError);
}

TEST_CASE("config parsing") {
  auto cfg = nbt::stub_config();
  CHECK(cfg.listen.port == 8765);
  CHECK(cfg.categories.name(1) == "apology");
  CHECK(cfg.categories.size() == 8);
  CHECK(cfg.engine.policy.timeout == 60s);
  CHECK(cfg.engine.policy.delivery == DeliveryKind::Translation);
  CHECK(cfg.engine.langs.fle == "zh");
  CHECK(cfg.base_dir == nbt::data("").parent_path());

  json j = {{"choice_timeout_ms", 5000},
            {"timeout_delivery", "remediation"},
            {"languages", {{"SME", "de"}, {"FLE", "ja"}}},
            {"context_turns", 3},
            {"show_low_impact_justification", true},
            {"transcript_dir", "out"},
            {"offline_queue", 8},
            {"seed", 9}};
  auto c = parse_config(j, "/base");
  CHECK(c.engine.policy.timeout == 5s);
  CHECK(c.engine.policy.delivery == DeliveryKind::Remediation);
  CHECK(c.engine.langs.sme == "de");
  CHECK(c.engine.context_turns == 3);
  CHECK(c.engine.report_low_impact_justification);
  CHECK(c.transcript_dir == std::filesystem::path("/base/out"));
  CHECK(c.offline_queue == 8);
  CHECK(c.seed == 9);
  CHECK(c.categories.name(0) == "category_1");

  CHECK_THROWS_AS(parse_config({{"mystery", 1}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"categories", {"a", "b"}}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"choice_timeout_ms", "soon"}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"choice_timeout_ms", 0}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"timeout_delivery", "both"}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"languages", {{"XX", "en"}}}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config({{"offline_queue", 0}}, "."), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array(), "."), ConfigError);
  CHECK_THROWS_AS(load_config(nbt::data("missing.json")), ConfigError);
}

TEST_CASE("seeded backends fill unset fault seeds only") {
  json b = {{"asr", {{"primary", {{"faults", {{"fail_rate", 0.3}}}}}}},
            {"mt", {{"primary", {{"faults", {{"fail_rate", 0.3}, {"seed", 5}}}}}}}};
  auto s = seeded_backends(b, 2);
  CHECK(s["asr"]["primary"]["faults"].contains("seed"));
  CHECK(s["mt"]["primary"]["faults"]["seed"] == 5);
  CHECK(seeded_backends(b, 2) == s);
  CHECK(seeded_backends(b, 3)["asr"]["primary"]["faults"]["seed"] !=
        s["asr"]["primary"]["faults"]["seed"]);
}

TEST_CASE("script parsing") {
  auto d = script(
      "# c\n"
      "SME\tfirst\n"
      "@lang SME=de FLE=ja\n"
      "FLE\tsecond\tchoice=remediation\tdelay.mt=250\n"
      "@dialogue named\n"
      "SME\tthird\tchoice=timeout\n"
      "\n");
  REQUIRE(d.size() == 2);
  CHECK(d[0].name == "dialogue-1");
  CHECK(d[0].langs.sme == "en");
  REQUIRE(d[0].steps.size() == 2);
  CHECK(d[0].steps[1].speaker == Role::FLE);
  CHECK(d[0].steps[1].choice == SenderChoice::Remediation);
  CHECK(d[0].steps[1].delays.at(backends::Task::MT) == 250ms);
  CHECK(d[0].steps[1].line == 4);
  CHECK(d[1].name == "named");
  CHECK(d[1].langs.sme == "de");
  CHECK(d[1].steps[0].choice == SenderChoice::TimedOut);

  CHECK(script("").empty());
  CHECK(script("# only comments\n").empty());

  auto error_line = [](const std::string& text) -> std::string {
    try {
      script(text);
    } catch (const ParseError& e) {
      return std::string(e.what()).substr(0, 7);
    }
    return "";
  };
  CHECK(error_line("SME\tok\nBOSS\thi\n") == "line 2:");
  CHECK(error_line("SME\n") == "line 1:");
  CHECK(error_line("SME\t  \n") == "line 1:");
  CHECK(error_line("SME\thi\tchoice=maybe\n") == "line 1:");
  CHECK(error_line("SME\thi\tdelay.nope=3\n") == "line 1:");
  CHECK(error_line("SME\thi\tdelay.mt=-3\n") == "line 1:");
  CHECK(error_line("SME\thi\tcolour=red\n") == "line 1:");
  CHECK(error_line("@frobnicate\n") == "line 1:");
  CHECK(error_line("@lang SME\n") == "line 1:");
  CHECK_THROWS_AS(script("@dialogue a\nSME\tx\n@dialogue a\nSME\ty\n"), ParseError);
  CHECK_THROWS_AS(load_script(nbt::data("missing.script")), ConfigError);
}

TEST_CASE("demo replay covers every route") {
  auto r = replay(load_script(nbt::data("demo.script")), nbt::stub_config());
  REQUIRE(r.transcript.size() == 10);
  CHECK(r.faulted == 0);
  CHECK(r.unscripted_prompts == 0);
  CHECK(r.choices.low_impact == 1);
  CHECK(r.choices.high_impact == 3);
  CHECK(r.choices.remediation_chosen == 1);
  for (const auto& e : r.transcript) CHECK_FALSE(check_turn_invariants(e.turn));
  CHECK(r.transcript[0].session_id == "demo");
  CHECK(r.transcript[7].session_id == "demo-2");
  CHECK(r.transcript[7].turn.sender_choice == SenderChoice::Translation);
  CHECK(r.transcript[9].turn.sender_choice == SenderChoice::TimedOut);
  CHECK(r.latency_means.at(LatencyPath::NoRemediation) == 1500ms);
  CHECK(r.latency_means.at(LatencyPath::LowImpact) == 6700ms);
  CHECK(r.transcript[0].turn.utterance.translated_text->find("报告") != std::string::npos);
}

TEST_CASE("replay is deterministic") {
  const auto s = load_script(nbt::data("demo.script"));
  auto a = replay(s, nbt::stub_config());
  auto b = replay(s, nbt::stub_config());
  CHECK(transcript_bytes(a) == transcript_bytes(b));

  auto cfg = nbt::stub_config();
  cfg.backends["mt"]["primary"]["faults"] = {{"fail_rate", 0.5}};
  cfg.backends["mt"]["backup"] = {{"kind", "local_stub"}, {"dictionary", "dictionary.tsv"}};
  cfg.seed = 3;
  CHECK(transcript_bytes(replay(s, cfg)) == transcript_bytes(replay(s, cfg)));
}

TEST_CASE("scripted delays shape latency") {
  auto r = replay(script("SME\tHello.\tdelay.mt=1000\nSME\tHello.\n"), nbt::stub_config());
  REQUIRE(r.latencies.size() == 2);
  CHECK(r.latencies[0].elapsed == 1900ms);
  CHECK(r.latencies[1].elapsed == 1500ms);
}

TEST_CASE("scripted choice without a prompt is a hard error") {
  try {
    replay(script("@dialogue d\nSME\tHello.\tchoice=remediation\nSME\tfine\nFLE\t你好\tchoice=translation\n"),
           nbt::stub_config());
    FAIL("expected ScriptMismatch");
  } catch (const ScriptMismatch& e) {
    CHECK(e.turns() == std::vector<std::string>{"d/t1", "d/t3"});
  }
}

TEST_CASE("unscripted prompts time out") {
  auto r = replay(script("SME\tThis is nonsense.\n"), nbt::stub_config());
  CHECK(r.unscripted_prompts == 1);
  CHECK(r.transcript.at(0).turn.sender_choice == SenderChoice::TimedOut);
}

TEST_CASE("empty script") {
  auto r = replay({}, nbt::stub_config());
  CHECK(r.transcript.empty());
  CHECK_FALSE(r.choices.ratio);
}

TEST_CASE("transcript round-trip") {
  auto r = replay(load_script(nbt::data("demo.script")), nbt::stub_config());
  std::stringstream ss;
  write_transcript(ss, r.transcript);
  auto back = read_transcript(ss);
  CHECK(back == r.transcript);

  auto j = to_json(r.transcript[4]);
  CHECK(j["session"] == "demo");
  CHECK(j["turn"] == "t5");
  CHECK(j["speaker"] == "SME");
  CHECK(j["analysis"]["violated"] == true);
  CHECK(j["sender_choice"] == "Remediation");

  std::istringstream bad("{}\n");
  CHECK_THROWS_AS(read_transcript(bad), ParseError);
  std::istringstream worse(ss.str().substr(0, 20) + "\n");
  try {
    read_transcript(worse);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).rfind("line 1:", 0) == 0);
  }
}
