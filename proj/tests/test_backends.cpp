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

#include <future>
#include <numeric>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "normbridge/backends/generation.hpp"
#include "normbridge/backends/remote.hpp"
#include "normbridge/backends/stacked.hpp"
#include "normbridge/backends/stubs.hpp"
#include "normbridge/core/error.hpp"

using namespace nb;
using namespace nb::backends;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

Utterance translated(std::string text, std::string translation, Role r = Role::SME) {
  auto u = nbt::utterance(1, r, std::move(text));
  u.translated_text = std::move(translation);
  return u;
}

BackendRequest request_for(Task t, Utterance u) {
  BackendRequest r;
  r.task = t;
  r.current = std::move(u);
  return r;
}

Outcome run_stub(Backend& b, const BackendRequest& req) {
  VirtualExecutor exec;
  std::optional<Outcome> out;
  b.invoke(req, exec, [&](Outcome o) { out = std::move(o); });
  exec.run();
  REQUIRE(out);
  return *out;
}

FallbackResult run_fallback(const TaskRoute& route, ReplyValidator validate = {},
                            int* completions = nullptr, VirtualExecutor* outer = nullptr) {
  VirtualExecutor local;
  VirtualExecutor& exec = outer ? *outer : local;
  std::optional<FallbackResult> res;
  invoke_with_fallback(route, request_for(route.task, nbt::utterance(1, Role::SME, "x")), exec,
                       std::move(validate), [&](FallbackResult r) {
                         if (completions) ++*completions;
                         res = std::move(r);
                       });
  exec.run();
  REQUIRE(res);
  return *res;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::shared_ptr<BackendSet> set_from(const json& backends) {
  return BackendSet::from_config(backends, nbt::data(""),
                                 CategorySet({"greeting", "apology", "request", "persuasion",
                                              "criticism", "thanks", "leave-taking"}),
                                 LanguagePair{});
}

}  // namespace

TEST_CASE("task names") {
  for (Task t : kAllTasks) CHECK(parse_task(config_key(t)) == t);
  CHECK_FALSE(parse_task("nope"));
  CHECK(default_timeout(Task::RemediationGen) == 10s);
  CHECK(default_timeout(Task::CategoryCls) == 3s);
}

TEST_CASE("lexicon") {
  std::istringstream in("# comment\n\nSorry\tapology\nhello\tgreeting\n你好\tgreeting\nbare\n");
  auto lex = Lexicon::parse(in);
  REQUIRE(lex.entries().size() == 4);
  CHECK(lex.first_match("I am SORRY, hello") == "apology");
  CHECK(lex.first_match("你好，朋友") == "greeting");
  CHECK(lex.first_match("bare feet") == "");
  CHECK_FALSE(lex.first_match("nothing"));
  auto hits = lex.hits("hello hello sorry");
  CHECK(hits["greeting"] == 1);
  CHECK(hits["apology"] == 1);
  CHECK(lex.strip("Sorry, hello there") == ",  there");

  std::istringstream bad("ok\tx\n\tlabel\n");
  try {
    Lexicon::parse(bad, "t.tsv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  std::istringstream utf("\xff\xfe\tx\n");
  CHECK_THROWS_AS(Lexicon::parse(utf), ParseError);
  CHECK_THROWS_AS(Lexicon::load(nbt::data("missing.tsv")), ConfigError);
}

TEST_CASE("dictionary translation") {
  auto dict = Dictionary::load(nbt::data("dictionary.tsv"));
  const auto zh = dict.translate("we need the report tomorrow", true);
  CHECK(zh.find("我们") != std::string::npos);
  CHECK(zh.find("报告") != std::string::npos);
  CHECK(zh.find("明天") != std::string::npos);
  CHECK(dict.translate("xyzzy", true) == "xyzzy");
  CHECK(dict.translate("wear", true) == "wear");
  CHECK(dict.translate("Hello", true) == "你好");
  CHECK(dict.translate("我们需要报告", false) == "we need the report");
  CHECK(dict.translate("报告明天", false) == "the report tomorrow");
}

TEST_CASE("identity asr and dictionary translator") {
  IdentityAsr asr;
  auto out = run_stub(asr, request_for(Task::ASR, nbt::utterance(1, Role::SME, "hi there")));
  REQUIRE(out.succeeded());
  CHECK(out.reply->text == "hi there");

  DictionaryTranslator mt(Dictionary::load(nbt::data("dictionary.tsv")), "en", "zh");
  auto u = nbt::utterance(1, Role::SME, "thank you");
  CHECK(run_stub(mt, request_for(Task::MT, u)).reply->text == "谢谢");
  auto back = nbt::utterance(1, Role::FLE, "谢谢");
  CHECK(run_stub(mt, request_for(Task::MT, back)).reply->text == "thank you");
}

TEST_CASE("lexicon classifiers") {
  auto labels = CategorySet::defaults().names();
  std::istringstream rules("sorry\tcategory_2\nhello\tcategory_1\n");
  auto lex = Lexicon::parse(rules);

  LexiconClassifier::Options opt;
  opt.task = Task::CategoryCls;
  opt.labels = labels;
  opt.default_label = "Other";
  LexiconClassifier discrete(lex, opt);
  auto hit = run_stub(discrete, request_for(Task::CategoryCls, translated("x", "so sorry")));
  CHECK(hit.reply->label == "category_2");
  CHECK(hit.reply->probs == ensemble::one_hot(1, 8));
  auto miss = run_stub(discrete, request_for(Task::CategoryCls, translated("x", "weather")));
  CHECK(miss.reply->label == "Other");

  opt.mode = LexiconClassifier::Mode::Probabilistic;
  LexiconClassifier prob(lex, opt);
  for (const char* text : {"sorry hello", "hello", "", "nothing at all"}) {
    auto o = run_stub(prob, request_for(Task::CategoryCls, translated("x", text)));
    REQUIRE(o.reply->probs.size() == 8);
    CHECK(sum(o.reply->probs) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sum(o.reply->probs) - 1.0) <= 1e-9);
    for (double p : o.reply->probs) CHECK(p >= 0.0);
  }

  SUBCASE("violation with empty lexicon never fires") {
    LexiconClassifier::Options v;
    v.task = Task::ViolationCls;
    v.labels = BackendSet::violation_labels();
    v.default_label = "false";
    v.hit_label = "true";
    LexiconClassifier none(Lexicon{}, v);
    for (const char* text : {"stupid", "hello", ""}) {
      CHECK(run_stub(none, request_for(Task::ViolationCls, translated("x", text))).reply->label ==
            "false");
    }
  }

  SUBCASE("impact looks at the whole window") {
    LexiconClassifier::Options i;
    i.task = Task::ImpactCls;
    i.labels = BackendSet::impact_labels();
    i.default_label = "Low";
    i.hit_label = "High";
    i.use_window = true;
    std::istringstream m("stupid\n");
    LexiconClassifier impact(Lexicon::parse(m), i);
    auto req = request_for(Task::ImpactCls, translated("x", "fine"));
    CHECK(run_stub(impact, req).reply->label == "Low");
    req.context.push_back(translated("that is stupid", "that is stupid"));
    CHECK(run_stub(impact, req).reply->label == "High");
  }
}

TEST_CASE("stubs are pure") {
  auto set = set_from(nbt::stub_config().backends);
  auto cat = set->route(Task::CategoryCls).primary;
  auto req = request_for(Task::CategoryCls, translated("x", "hurry up, you are wrong"));
  auto a = run_stub(*cat, req);
  auto b = run_stub(*cat, req);
  CHECK(a.reply->label == b.reply->label);
  CHECK(a.reply->probs == b.reply->probs);
}

TEST_CASE("template generators") {
  std::istringstream strip("give me\n");
  TemplateRemediator rem({}, Lexicon::parse(strip));
  auto u = translated("x", "Give me the samples today.");
  u.target_lang = "en";
  auto out = run_stub(rem, request_for(Task::RemediationGen, u));
  CHECK(out.reply->text == "Could you please the samples today?");

  TemplateJustifier just({});
  auto req = request_for(Task::JustificationGen, u);
  CHECK_FALSE(run_stub(just, req).succeeded());
  req.remediation = *out.reply->text;
  req.category = "request";
  auto j = run_stub(just, req);
  REQUIRE(j.succeeded());
  CHECK(j.reply->text->find("request") != std::string::npos);

  CHECK(fill_template("{a}-{b}-{a}", {{"a", "1"}, {"b", "2"}}) == "1-2-1");
}

TEST_CASE("parse_generation") {
  auto p = parse_generation("Remediation: X\nJustification: Y");
  CHECK(p.remediation == "X");
  CHECK(p.justification == "Y");

  p = parse_generation("JUSTIFICATION: because\nREMEDIATION: say it nicely");
  CHECK(p.remediation == "say it nicely");
  CHECK(p.justification == "because");

  p = parse_generation("Sure!\nremediation: line one\nline two\njustification：理由");
  CHECK(p.remediation == "line one\nline two");
  CHECK(p.justification == "理由");

  CHECK_THROWS_AS(parse_generation("no labels here"), ParseError);
  CHECK_THROWS_AS(parse_generation("Remediation: only one"), ParseError);
  CHECK_THROWS_AS(parse_generation("Remediation:\nJustification: y"), ParseError);

  GenerationGrammar g;
  g.remediation_labels.push_back("修改");
  g.justification_labels.push_back("解释");
  p = parse_generation("修改: A\n解释: B", g);
  CHECK(p.remediation == "A");
  CHECK(has_generation_labels("x\nremediation: y"));
  CHECK_FALSE(has_generation_labels("the remediation: inline"));
}

TEST_CASE("fallback policy") {
  TaskRoute route;
  route.task = Task::RemediationGen;
  route.primary_timeout = 1s;
  route.backup_timeout = 1s;

  SUBCASE("primary answers in time") {
    route.primary = nbt::FakeBackend::text("P", 200ms);
    route.backup = nbt::FakeBackend::text("B");
    auto r = run_fallback(route);
    REQUIRE(r.ok());
    CHECK(r.response->provenance == Provenance::PrimaryBackend);
    CHECK(r.response->payload.text == "P");
    CHECK(r.response->latency == 200ms);
    CHECK(r.response->latency <= route.primary_timeout);
  }
  SUBCASE("slow primary falls back and its late reply is ignored") {
    auto backup = nbt::FakeBackend::text("B", 100ms);
    route.primary = nbt::FakeBackend::text("P", 5s);
    route.backup = backup;
    int completions = 0;
    auto r = run_fallback(route, {}, &completions);
    REQUIRE(r.ok());
    CHECK(r.response->provenance == Provenance::BackupBackend);
    CHECK(r.response->payload.text == "B");
    CHECK(r.response->latency == 1100ms);
    CHECK(completions == 1);
  }
  SUBCASE("hanging primary") {
    auto primary = nbt::FakeBackend::text("P");
    primary->hang = true;
    route.primary = primary;
    route.backup = nbt::FakeBackend::text("B");
    auto r = run_fallback(route);
    REQUIRE(r.ok());
    CHECK(r.response->provenance == Provenance::BackupBackend);
  }
  SUBCASE("primary error without backup") {
    route.primary = nbt::FakeBackend::failing("down");
    auto r = run_fallback(route);
    CHECK_FALSE(r.ok());
    CHECK(r.error.rfind("BothBackendsFailed", 0) == 0);
    CHECK(r.error.find("down") != std::string::npos);
  }
  SUBCASE("both fail") {
    route.primary = nbt::FakeBackend::failing("p");
    route.backup = nbt::FakeBackend::failing("b");
    auto r = run_fallback(route);
    CHECK_FALSE(r.ok());
    CHECK(r.error.find("backup (b)") != std::string::npos);
  }
  SUBCASE("backup timing out") {
    route.primary = nbt::FakeBackend::failing("p");
    route.backup = nbt::FakeBackend::text("B", 2s);
    int completions = 0;
    auto r = run_fallback(route, {}, &completions);
    CHECK_FALSE(r.ok());
    CHECK(completions == 1);
  }
  SUBCASE("invalid primary reply is a failure") {
    route.primary = nbt::FakeBackend::text("");
    route.backup = nbt::FakeBackend::text("B");
    auto r = run_fallback(route, [](const BackendReply& rep) -> std::optional<std::string> {
      if (!rep.text || rep.text->empty()) return "empty";
      return std::nullopt;
    });
    REQUIRE(r.ok());
    CHECK(r.response->provenance == Provenance::BackupBackend);
  }
}

TEST_CASE("injected fault rates") {
  auto cfg = nbt::instant_config().backends;
  SUBCASE("30% errors") {
    cfg["asr"]["primary"]["faults"] = {{"fail_rate", 0.3}, {"seed", 11}};
    cfg["asr"]["backup"] = {{"kind", "local_stub"}};
    auto set = set_from(cfg);
    VirtualExecutor exec;
    int ok = 0;
    for (int i = 0; i < 1000; ++i) {
      set->transcribe(nbt::utterance(i, Role::SME, "hello"), exec,
                      [&](Result<TextOutcome> r) { ok += r.ok(); });
    }
    exec.run();
    CHECK(ok == 1000);
    const double rate = static_cast<double>(set->stats().backup(Task::ASR)) / 1000.0;
    CHECK(std::abs(rate - 0.3) <= 0.02);
    CHECK(set->stats().calls(Task::ASR) == 1000);
  }
  SUBCASE("100% hangs") {
    cfg["mt"]["primary"]["faults"] = {{"fail_rate", 1.0}, {"mode", "hang"}};
    cfg["mt"]["primary"]["timeout_ms"] = 500;
    cfg["mt"]["backup"] = {{"kind", "local_stub"}, {"dictionary", "dictionary.tsv"}};
    auto set = set_from(cfg);
    VirtualExecutor exec;
    std::vector<Provenance> prov;
    for (int i = 0; i < 50; ++i) {
      set->translate(nbt::utterance(i, Role::SME, "hello"), exec,
                     [&](Result<TextOutcome> r) {
                       REQUIRE(r.ok());
                       prov.push_back(r.value->provenance);
                       CHECK(r.value->text == "你好");
                     });
    }
    exec.run();
    REQUIRE(prov.size() == 50);
    for (auto p : prov) CHECK(p == Provenance::BackupBackend);
  }
}

TEST_CASE("backend config errors") {
  CHECK_THROWS_AS(set_from(json{{"nope", json::object()}}), ConfigError);
  CHECK_THROWS_AS(set_from(json{{"asr", {{"primary", {{"kind", "magic"}}}}}}), ConfigError);
  CHECK_THROWS_AS(set_from(json{{"category", {{"primary", {{"kind", "rule_based"}, {"lexicon", "missing.tsv"}}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(set_from(json{{"asr", {{"primary", {{"faults", {{"fail_rate", 2.0}}}}}}}}), ConfigError);
  CHECK_THROWS_AS(set_from(json{{"asr", {{"primary", {{"faults", {{"mode", "explode"}}}}}}}}), ConfigError);
  CHECK_THROWS_AS(set_from(json::array()), ConfigError);
  auto set = set_from(json::object());
  for (Task t : kAllTasks) CHECK(set->route(t).primary);
}

TEST_CASE("typed wrappers decode distributions") {
  auto set = set_from(nbt::instant_config().backends);
  VirtualExecutor exec;

  std::optional<CategoryOutcome> cat;
  set->classify_category({}, translated("x", "sorry about that"), exec,
                         [&](Result<CategoryOutcome> r) { cat = r.value; });
  std::optional<ViolationOutcome> vio;
  set->detect_violation({}, translated("x", "hurry up"), NormCategory{}, exec,
                        [&](Result<ViolationOutcome> r) { vio = r.value; });
  std::optional<ImpactOutcome> imp;
  set->classify_impact({translated("x", "you are stupid")}, exec,
                       [&](Result<ImpactOutcome> r) { imp = r.value; });
  exec.run();
  REQUIRE(cat);
  CHECK(cat->category.name == "apology");
  CHECK(cat->category.index == 1);
  CHECK(std::abs(sum(cat->probs) - 1.0) <= 1e-9);
  REQUIRE(vio);
  CHECK(vio->violated);
  REQUIRE(imp);
  CHECK(imp->impact == Impact::High);

  CHECK_THROWS_AS(set->classify_category({}, nbt::utterance(1, Role::SME, "x"), exec, {}),
                  PreconditionError);
  CHECK_THROWS_AS(set->classify_impact({}, exec, {}), PreconditionError);

  BackendReply bad;
  bad.probs = {0.5, 0.6};
  CHECK_THROWS_AS(set->decode_distribution(bad, BackendSet::violation_labels()), BackendError);
  bad.probs = {1.0};
  CHECK_THROWS_AS(set->decode_distribution(bad, BackendSet::violation_labels()), BackendError);
  BackendReply lbl;
  lbl.label = "High";
  CHECK(set->decode_distribution(lbl, BackendSet::impact_labels()) == std::vector<double>{0, 1});
}

TEST_CASE("combined generator output is split") {
  auto set = set_from(nbt::instant_config().backends);
  set->set_route({Task::RemediationGen,
                  nbt::FakeBackend::text("Remediation: R\nJustification: J"), 1s, nullptr, 1s});
  VirtualExecutor exec;
  std::optional<TextOutcome> out;
  set->generate_remediation({}, translated("x", "y"), NormCategory{}, exec,
                            [&](Result<TextOutcome> r) { out = r.value; });
  exec.run();
  REQUIRE(out);
  CHECK(out->text == "R");
  CHECK(out->justification == "J");

  set->set_route({Task::RemediationGen, nbt::FakeBackend::text("Remediation: only"), 1s,
                  nbt::FakeBackend::text("plain backup"), 1s});
  out.reset();
  set->generate_remediation({}, translated("x", "y"), NormCategory{}, exec,
                            [&](Result<TextOutcome> r) { out = r.value; });
  exec.run();
  REQUIRE(out);
  CHECK(out->text == "plain backup");
  CHECK(out->provenance == Provenance::BackupBackend);
}

TEST_CASE("remote adapter") {
  httplib::Server server;
  json seen;
  server.Post("/infer", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    if (seen["current"] == "slow") std::this_thread::sleep_for(600ms);
    if (seen["current"] == "bad") {
      res.set_content("not json", "application/json");
      return;
    }
    if (seen["current"] == "500") {
      res.status = 500;
      return;
    }
    res.set_content(R"({"label":"apology","probs":null})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto call = [&](std::string text, Duration timeout) {
    RemoteHttpBackend remote("http://127.0.0.1:" + std::to_string(port) + "/infer", timeout);
    ThreadExecutor exec;
    std::promise<Outcome> p;
    auto req = request_for(Task::CategoryCls, translated("src", text));
    req.context.push_back(translated("earlier", "before"));
    req.category = "apology";
    remote.invoke(req, exec, [&](Outcome o) { p.set_value(std::move(o)); });
    return p.get_future().get();
  };

  auto ok = call("so sorry", 2s);
  REQUIRE(ok.succeeded());
  CHECK(ok.reply->label == "apology");
  CHECK(seen["task"] == "category");
  CHECK(seen["context"] == json::array({"before"}));
  CHECK(seen["current"] == "so sorry");
  CHECK(seen["category"] == "apology");
  CHECK(seen["source_lang"] == "en");

  CHECK_FALSE(call("bad", 2s).succeeded());
  CHECK(call("500", 2s).error.find("500") != std::string::npos);
  CHECK_FALSE(call("slow", 200ms).succeeded());

  server.stop();
  t.join();

  CHECK_THROWS_AS(RemoteHttpBackend("ftp://x/y", 1s), ConfigError);
  CHECK_THROWS_AS(RemoteHttpBackend::parse_reply("[]"), BackendError);
  CHECK_THROWS_AS(RemoteHttpBackend::parse_reply("{}"), BackendError);
  CHECK_THROWS_AS(RemoteHttpBackend::parse_reply(R"({"probs":"x"})"), BackendError);
  auto r = RemoteHttpBackend::parse_reply(R"({"text":"hi","probs":[0.25,0.75]})");
  CHECK(r.text == "hi");
  CHECK(r.probs == std::vector<double>{0.25, 0.75});

  auto mt = request_for(Task::MT, nbt::utterance(1, Role::SME, "raw"));
  mt.current.audio_ref = "clip.wav";
  auto body = RemoteHttpBackend::request_body(mt);
  CHECK(body["current"] == "raw");
  CHECK(body["audio_ref"] == "clip.wav");
  CHECK_FALSE(body.contains("category"));
}

TEST_CASE("stacked classifier") {
  const std::vector<std::string> labels{"false", "true"};
  auto discrete = std::make_shared<nbt::FakeBackend>([](const BackendRequest&) {
    BackendReply r;
    r.label = "true";
    return Outcome::ok(r);
  });
  auto prob = std::make_shared<nbt::FakeBackend>([](const BackendRequest&) {
    BackendReply r;
    r.probs = {0.9, 0.1};
    return Outcome::ok(r);
  });
  auto copy_b = ensemble::StackingModel::zeros(2);
  copy_b.weight(0, 2) = 10.0;
  copy_b.weight(1, 3) = 10.0;
  StackedClassifier stacked(discrete, prob, copy_b, labels);
  auto out = run_stub(stacked, request_for(Task::ViolationCls, translated("x", "y")));
  REQUIRE(out.succeeded());
  CHECK(out.reply->label == "false");
  CHECK(std::abs(sum(out.reply->probs) - 1.0) <= 1e-9);

  StackedClassifier broken(nbt::FakeBackend::failing("d"), prob, copy_b, labels);
  CHECK_FALSE(run_stub(broken, request_for(Task::ViolationCls, translated("x", "y"))).succeeded());

  BackendReply lbl;
  lbl.label = "true";
  CHECK(StackedClassifier::lift(lbl, labels) == std::vector<double>{0, 1});
  lbl.label = "maybe";
  CHECK_THROWS_AS(StackedClassifier::lift(lbl, labels), BackendError);
  BackendReply vec;
  vec.probs = {0.2, 0.3, 0.5};
  CHECK_THROWS_AS(StackedClassifier::lift(vec, labels), BackendError);
}
