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

// normbridge: serve, replay, eval and train-stacker entry points.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "normbridge/app/config.hpp"
#include "normbridge/app/replay.hpp"
#include "normbridge/app/script.hpp"
#include "normbridge/app/transcript.hpp"
#include "normbridge/core/error.hpp"
#include "normbridge/engine/executor.hpp"
#include "normbridge/ensemble/dataset.hpp"
#include "normbridge/ensemble/synthetic.hpp"
#include "normbridge/eval/io.hpp"
#include "normbridge/eval/metrics.hpp"
#include "normbridge/middleware/hub.hpp"
#include "normbridge/middleware/ws_server.hpp"

namespace {

using nb::Error;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

/// Bad invocation: missing inputs, unreadable files.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

nb::AppConfig config_from(const std::string& path) {
  if (path.empty()) return nb::AppConfig{};
  return nb::load_config(path);
}

// serve

/// Appends completed turns and transitions under the transcript directory,
/// flushing after every record.
class TranscriptSink : public nb::EngineObserver {
 public:
  explicit TranscriptSink(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
    if (!dir_) return;
    std::filesystem::create_directories(*dir_);
    log_.open(*dir_ / "transcript.tsv", std::ios::app);
    if (!log_) throw nb::ConfigError("cannot write to " + dir_->string());
  }

  void on_transition(const nb::TransitionRecord& r) override {
    if (!dir_) return;
    std::lock_guard lock(mu_);
    log_ << nb::format_transition(r) << '\n' << std::flush;
  }

  void on_turn_completed(const std::string& session, const nb::DialogueTurn& turn) override {
    if (!dir_) return;
    std::lock_guard lock(mu_);
    auto& out = turns_[session];
    if (!out.is_open()) out.open(*dir_ / (session + ".turns.jsonl"), std::ios::app);
    out << nb::to_json(nb::TranscriptEntry{session, turn}).dump() << '\n' << std::flush;
  }

  void close() {
    std::lock_guard lock(mu_);
    for (auto& [_, f] : turns_) f.close();
    if (log_.is_open()) log_.close();
  }

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::ofstream log_;
  std::map<std::string, std::ofstream> turns_;
};

struct ServeArgs {
  std::string config;
  std::string listen;
};

int cmd_serve(const ServeArgs& args) {
  auto cfg = config_from(args.config);
  if (!args.listen.empty()) cfg.listen = nb::parse_listen(args.listen);
  auto backends = nb::build_backends(cfg);

  TranscriptSink sink(cfg.transcript_dir);
  nb::Hub hub(nb::HubOptions{cfg.offline_queue});
  std::mutex exec_mu;
  std::vector<std::shared_ptr<nb::ThreadExecutor>> executors;
  nb::Engine engine(
      cfg.engine, backends, hub,
      [&](const std::string&) {
        auto e = std::make_shared<nb::ThreadExecutor>();
        std::lock_guard lock(exec_mu);
        executors.push_back(e);
        return e;
      },
      &sink);
  hub.attach(&engine);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  nb::WsOptions ws;
  ws.static_dir = cfg.static_dir;
  nb::WsServer server(hub, ws);
  try {
    server.start(cfg.listen);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  spdlog::info("normbridge ready on ws://{}:{}", cfg.listen.host, server.port());

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("received signal {}, shutting down", sig);
    server.stop();
  });
  server.wait();
  waiter.join();

  {
    std::lock_guard lock(exec_mu);
    for (auto& e : executors) e->drain();
  }
  sink.close();
  spdlog::info("transcripts flushed");
  return kOk;
}

// replay

struct ReplayArgs {
  std::string script;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string transcript;
  std::string turns;
  bool json = false;
};

void write_to(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path == "-") return fn(std::cout);
  auto out = open_output(path);
  fn(out);
}

int cmd_replay(const ReplayArgs& args) {
  auto cfg = config_from(args.config);
  if (args.seed) cfg.seed = *args.seed;
  std::vector<nb::ScriptedDialogue> script;
  {
    auto in = open_input(args.script);
    try {
      script = nb::parse_script(in);
    } catch (const nb::ParseError& e) {
      throw UsageError(args.script + ": " + e.what());
    }
  }
  const auto result = nb::replay(script, cfg);

  if (!args.transcript.empty()) {
    write_to(args.transcript, [&](std::ostream& out) {
      for (const auto& r : result.transitions) out << nb::format_transition(r) << '\n';
    });
  }
  if (!args.turns.empty()) {
    write_to(args.turns, [&](std::ostream& out) { nb::write_transcript(out, result.transcript); });
  }

  nb::eval::EvalReport report;
  report.choices = result.choices;
  report.latency = result.latency_means;
  if (args.json) {
    auto j = nb::eval::report_json(report);
    j["dialogues"] = script.size();
    j["turns"] = result.transcript.size();
    j["faulted"] = result.faulted;
    j["unscripted_prompts"] = result.unscripted_prompts;
    std::cout << j.dump(2) << '\n';
  } else if (args.transcript != "-" && args.turns != "-") {
    std::cout << fmt::format("{:<22}{:>12}\n", "dialogues", script.size())
              << fmt::format("{:<22}{:>12}\n", "turns", result.transcript.size())
              << fmt::format("{:<22}{:>12}\n", "faulted", result.faulted)
              << nb::eval::format_report(report, false);
  }
  return kOk;
}

// eval

struct EvalArgs {
  std::string predictions;
  std::vector<std::string> metrics{"prf"};
  std::size_t max_n = 4;
  bool smooth = false;
  std::string transcript;
  std::string turns;
  bool json = false;
  bool percent = false;
};

int cmd_eval(const EvalArgs& args) {
  if (args.predictions.empty() && args.transcript.empty() && args.turns.empty()) {
    throw UsageError("give at least one of --predictions, --transcript, --turns");
  }
  nb::eval::EvalReport report;
  if (!args.predictions.empty()) {
    auto in = open_input(args.predictions);
    nb::eval::EvalOptions opt;
    opt.prf = false;
    for (const auto& m : args.metrics) {
      if (m == "prf") opt.prf = true;
      else if (m == "bleu") opt.bleu = true;
      else if (m == "rouge") opt.rouge = true;
      else if (m == "kappa") opt.kappa = true;
      else throw UsageError("unknown metric '" + m + "' (prf, bleu, rouge, kappa)");
    }
    opt.bleu_max_n = args.max_n;
    opt.smoothing = args.smooth ? nb::eval::BleuSmoothing::AddOne : nb::eval::BleuSmoothing::None;
    report = nb::eval::evaluate_predictions(nb::eval::read_predictions(in), opt);
  }
  if (!args.transcript.empty()) {
    auto in = open_input(args.transcript);
    const auto latencies = nb::latencies_from_log(nb::read_transition_log(in));
    report.latency = nb::eval::latency_means(latencies);
  }
  if (!args.turns.empty()) {
    auto in = open_input(args.turns);
    std::vector<nb::DialogueTurn> turns;
    for (auto& e : nb::read_transcript(in)) turns.push_back(std::move(e.turn));
    report.choices = nb::eval::choice_stats(turns);
  }
  if (args.json) {
    std::cout << nb::eval::report_json(report).dump(2) << '\n';
  } else {
    std::cout << nb::eval::format_report(report, args.percent);
  }
  return kOk;
}

// train-stacker

struct TrainArgs {
  std::string features;
  std::string labels;
  std::string out;
  double holdout = 0.0;
  nb::ensemble::TrainConfig train;
  bool json = false;
};

double micro_f1(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& golds,
                std::size_t k) {
  return nb::eval::micro_prf(preds, golds, k).f1_micro;
}

int cmd_train(const TrainArgs& args) {
  std::vector<nb::ensemble::FeatureVector> features;
  std::vector<std::size_t> labels;
  {
    auto in = open_input(args.features);
    features = nb::ensemble::read_features(in);
  }
  {
    auto in = open_input(args.labels);
    labels = nb::ensemble::read_labels(in);
  }
  if (features.size() != labels.size()) {
    throw nb::DimensionError(fmt::format("{} feature rows but {} labels", features.size(),
                                         labels.size()));
  }
  if (features.empty()) throw nb::DimensionError("no training data");
  const std::size_t k = features.front().classes();

  auto [train_idx, test_idx] =
      nb::ensemble::holdout_split(features.size(), args.holdout, args.train.seed);
  auto pick = [](const auto& v, const std::vector<std::size_t>& idx) {
    std::remove_cvref_t<decltype(v)> out;
    for (auto i : idx) out.push_back(v[i]);
    return out;
  };
  const auto model = nb::ensemble::train_stacker(pick(features, train_idx),
                                                 pick(labels, train_idx), args.train);
  nb::ensemble::save_model(model, std::filesystem::path(args.out));

  ordered_json j;
  j["classes"] = k;
  j["train_examples"] = train_idx.size();
  j["degenerate"] = model.degenerate;
  if (model.degenerate) {
    spdlog::warn("training labels cover fewer than {} classes; model is degenerate", k);
  }
  if (!test_idx.empty()) {
    const auto test_x = pick(features, test_idx);
    const auto test_y = pick(labels, test_idx);
    std::vector<std::size_t> stacked;
    for (const auto& f : test_x) stacked.push_back(nb::ensemble::predict(model, f).label);
    j["heldout_examples"] = test_idx.size();
    j["heldout_f1"] = {
        {"stacker", micro_f1(stacked, test_y, k)},
        {"discrete_base", micro_f1(nb::ensemble::base_predictions(test_x, true), test_y, k)},
        {"probabilistic_base",
         micro_f1(nb::ensemble::base_predictions(test_x, false), test_y, k)}};
  }
  if (args.json) {
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  std::cout << fmt::format("trained {}-class stacker on {} examples -> {}\n", k,
                           train_idx.size(), args.out);
  if (j.contains("heldout_f1")) {
    const auto& f = j["heldout_f1"];
    std::cout << fmt::format("held-out F1-Micro ({} examples): stacker {:.4f}, "
                             "discrete base {:.4f}, probabilistic base {:.4f}\n",
                             test_idx.size(), f["stacker"].get<double>(),
                             f["discrete_base"].get<double>(),
                             f["probabilistic_base"].get<double>());
  }
  return kOk;
}

struct SynthArgs {
  nb::ensemble::ComplementaryConfig cfg;
  std::string features;
  std::string labels;
};

int cmd_synth(const SynthArgs& args) {
  const auto data = nb::ensemble::make_complementary_dataset(args.cfg);
  auto f = open_output(args.features);
  nb::ensemble::write_features(f, data.features);
  auto l = open_output(args.labels);
  nb::ensemble::write_labels(l, data.labels);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("normbridge"));
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");

  CLI::App app{"normbridge: norm-aware mediation for bilingual dialogue"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->envname("NB_LOG_LEVEL");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the WebSocket service");
  s->add_option("--config", serve.config, "JSON config file")->envname("NB_CONFIG");
  s->add_option("--listen", serve.listen, "host:port, overrides the config")
      ->envname("NB_LISTEN");

  ReplayArgs replay;
  auto* r = app.add_subcommand("replay", "Replay a dialogue script headlessly");
  r->add_option("--script", replay.script, "dialogue script")->required();
  r->add_option("--config", replay.config, "JSON config file")->envname("NB_CONFIG");
  r->add_option("--seed", replay.seed, "seed for injected backend faults");
  r->add_option("--transcript", replay.transcript, "write the transition log here (- for stdout)");
  r->add_option("--turns", replay.turns, "write completed turns as JSON lines (- for stdout)");
  r->add_flag("--json", replay.json, "print the summary as JSON");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compute metrics from prediction, transcript or turn files");
  e->add_option("--predictions", ev.predictions, "id<TAB>pred<TAB>gold file");
  e->add_option("--metrics", ev.metrics, "prf, bleu, rouge, kappa")->delimiter(',');
  e->add_option("--max-n", ev.max_n, "highest BLEU n-gram order")->check(CLI::Range(1, 8));
  e->add_flag("--smooth", ev.smooth, "add-one smoothing for BLEU orders 2 and up");
  e->add_option("--transcript", ev.transcript, "transition log, for latency means");
  e->add_option("--turns", ev.turns, "turn JSON lines, for choice statistics");
  e->add_flag("--json", ev.json, "machine-readable output");
  e->add_flag("--percent", ev.percent, "show scores x100 with two decimals");

  TrainArgs tr;
  auto* t = app.add_subcommand("train-stacker", "Fit the stacking meta-classifier");
  t->add_option("--features", tr.features, "one stacked feature vector per line")->required();
  t->add_option("--labels", tr.labels, "one class index per line")->required();
  t->add_option("--out", tr.out, "model file to write")->required();
  t->add_option("--holdout", tr.holdout, "fraction held out for evaluation")
      ->check(CLI::Range(0.0, 0.99));
  t->add_option("--seed", tr.train.seed, "initialisation and split seed");
  t->add_option("--epochs", tr.train.epochs);
  t->add_option("--lr", tr.train.learning_rate);
  t->add_option("--l2", tr.train.l2);
  t->add_flag("--json", tr.json, "machine-readable output");

  SynthArgs sy;
  auto* g = app.add_subcommand("make-synthetic",
                               "Write a complementary-error stacking dataset");
  g->add_option("--classes", sy.cfg.classes)->check(CLI::Range(2, 1000));
  g->add_option("--examples", sy.cfg.examples)->check(CLI::Range(1, 10000000));
  g->add_option("--seed", sy.cfg.seed);
  g->add_option("--features", sy.features)->required();
  g->add_option("--labels", sy.labels)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*s) return cmd_serve(serve);
    if (*r) return cmd_replay(replay);
    if (*e) return cmd_eval(ev);
    if (*t) return cmd_train(tr);
    if (*g) return cmd_synth(sy);
  } catch (const UsageError& err) {
    spdlog::error("{}", err.what());
    return kUsage;
  } catch (const nb::ConfigError& err) {
    spdlog::error("config: {}", err.what());
    return kUsage;
  } catch (const nb::ScriptMismatch& err) {
    spdlog::error("{}", err.what());
    return kFailure;
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return kFailure;
  }
  return kFailure;
}
