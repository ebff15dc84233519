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

#include "normbridge/backends/backend_set.hpp"

#include <algorithm>
#include <cmath>

#include "normbridge/backends/remote.hpp"
#include "normbridge/backends/stacked.hpp"
#include "normbridge/backends/stubs.hpp"
#include "normbridge/core/error.hpp"
#include "normbridge/ensemble/stacking.hpp"

namespace nb::backends {

using nlohmann::json;

namespace {

std::string canonical_label(Task task, std::string label) {
  if (task == Task::ViolationCls) {
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (label == "violates" || label == "yes" || label == "1") return "true";
    if (label == "adheres" || label == "no" || label == "0") return "false";
  } else if (task == Task::ImpactCls) {
    if (auto i = parse_impact(label)) return std::string(to_string(*i));
  }
  return label;
}

std::size_t index_in(const std::vector<std::string>& labels, const std::string& l) {
  auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) throw BackendError("unknown label '" + l + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

// ---- config ----------------------------------------------------------------

struct BuildContext {
  std::filesystem::path base_dir;
  const CategorySet* categories;
  LanguagePair langs;
  std::shared_ptr<const StageDelays> stage_delays;
};

std::filesystem::path resolve(const BuildContext& ctx, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : ctx.base_dir / path;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

Lexicon lexicon_from(const BuildContext& ctx, const json& spec, const char* key) {
  if (!spec.contains(key)) return {};
  const auto& v = spec[key];
  if (v.is_string()) return Lexicon::load(resolve(ctx, v.get<std::string>()));
  // Inline rules: [["pattern", "label"], ...] or ["pattern", ...]
  std::vector<Lexicon::Entry> entries;
  for (const auto& e : v) {
    if (e.is_string()) {
      entries.push_back({e.get<std::string>(), ""});
    } else {
      entries.push_back({e.at(0).get<std::string>(),
                         e.size() > 1 ? e.at(1).get<std::string>() : std::string{}});
    }
  }
  return Lexicon(std::move(entries));
}

std::vector<std::string> labels_for(Task task, const CategorySet& cats) {
  switch (task) {
    case Task::CategoryCls: return cats.names();
    case Task::ViolationCls: return BackendSet::violation_labels();
    case Task::ImpactCls: return BackendSet::impact_labels();
    default: return {};
  }
}

std::shared_ptr<Backend> build(Task task, const json& spec, const BuildContext& ctx);

void configure_stub(StubBackend& stub, const json& spec, const BuildContext& ctx) {
  stub.set_delay(std::chrono::milliseconds(get_or<long long>(spec, "delay_ms", 0)));
  stub.set_stage_delays(ctx.stage_delays);
  if (spec.contains("faults")) {
    const auto& f = spec["faults"];
    FaultInjection fi;
    fi.fail_rate = get_or<double>(f, "fail_rate", 0.0);
    fi.seed = get_or<std::uint64_t>(f, "seed", 0);
    const auto mode = get_or<std::string>(f, "mode", "error");
    if (mode == "hang") {
      fi.mode = FaultMode::Hang;
    } else if (mode != "error") {
      throw ConfigError("fault mode must be error or hang, got " + mode);
    }
    if (fi.fail_rate < 0.0 || fi.fail_rate > 1.0) {
      throw ConfigError("fail_rate must lie in [0, 1]");
    }
    stub.set_faults(fi);
  }
}

std::shared_ptr<Backend> build_classifier(Task task, const json& spec,
                                          const BuildContext& ctx, bool discrete) {
  LexiconClassifier::Options opt;
  opt.task = task;
  opt.labels = labels_for(task, *ctx.categories);
  opt.mode = discrete ? LexiconClassifier::Mode::Discrete
                      : LexiconClassifier::Mode::Probabilistic;
  opt.use_window = task == Task::ImpactCls;
  switch (task) {
    case Task::CategoryCls:
      opt.default_label = std::string(CategorySet::kOther);
      break;
    case Task::ViolationCls:
      opt.default_label = "false";
      opt.hit_label = "true";
      break;
    default:
      opt.default_label = "Low";
      opt.hit_label = "High";
      break;
  }
  opt.default_label = get_or<std::string>(spec, "default_label", opt.default_label);
  opt.hit_label = get_or<std::string>(spec, "hit_label", opt.hit_label);
  opt.smoothing = get_or<double>(spec, "smoothing", opt.smoothing);
  auto c = std::make_shared<LexiconClassifier>(lexicon_from(ctx, spec, "lexicon"), opt);
  configure_stub(*c, spec, ctx);
  return c;
}

std::shared_ptr<Backend> build(Task task, const json& spec, const BuildContext& ctx) {
  const auto kind = get_or<std::string>(spec, "kind", "local_stub");
  const Duration timeout = spec.contains("timeout_ms")
                               ? Duration(std::chrono::milliseconds(spec["timeout_ms"].get<long long>()))
                               : default_timeout(task);
  if (kind == "remote_http") {
    return std::make_shared<RemoteHttpBackend>(spec.at("endpoint").get<std::string>(), timeout);
  }
  if (kind == "stacked") {
    if (task != Task::CategoryCls && task != Task::ViolationCls) {
      throw ConfigError("stacked backends are only available for category and violation");
    }
    auto model = ensemble::load_model(resolve(ctx, spec.at("model").get<std::string>()));
    return std::make_shared<StackedClassifier>(build(task, spec.at("discrete"), ctx),
                                               build(task, spec.at("probabilistic"), ctx),
                                               std::move(model),
                                               labels_for(task, *ctx.categories));
  }
  const bool rule_based = kind == "rule_based";
  if (!rule_based && kind != "local_stub") {
    throw ConfigError("unknown backend kind '" + kind + "' for " +
                      std::string(config_key(task)));
  }
  switch (task) {
    case Task::ASR: {
      auto b = std::make_shared<IdentityAsr>();
      configure_stub(*b, spec, ctx);
      return b;
    }
    case Task::MT: {
      Dictionary dict;
      if (spec.contains("dictionary")) {
        dict = Dictionary::load(resolve(ctx, spec["dictionary"].get<std::string>()));
      }
      auto b = std::make_shared<DictionaryTranslator>(
          std::move(dict), get_or<std::string>(spec, "from", ctx.langs.sme),
          get_or<std::string>(spec, "to", ctx.langs.fle));
      configure_stub(*b, spec, ctx);
      return b;
    }
    case Task::CategoryCls:
    case Task::ViolationCls:
    case Task::ImpactCls:
      return build_classifier(task, spec, ctx,
                              rule_based || !get_or<bool>(spec, "probabilistic", false));
    case Task::RemediationGen: {
      auto b = std::make_shared<TemplateRemediator>(
          get_or<std::map<std::string, std::string>>(spec, "templates", {}),
          lexicon_from(ctx, spec, "strip"));
      configure_stub(*b, spec, ctx);
      return b;
    }
    case Task::JustificationGen: {
      auto b = std::make_shared<TemplateJustifier>(
          get_or<std::map<std::string, std::string>>(spec, "templates", {}));
      configure_stub(*b, spec, ctx);
      return b;
    }
  }
  throw ConfigError("unhandled task");
}

Duration timeout_of(Task task, const json& spec) {
  return spec.contains("timeout_ms")
             ? Duration(std::chrono::milliseconds(spec["timeout_ms"].get<long long>()))
             : default_timeout(task);
}

}  // namespace

Duration default_timeout(Task t) {
  using std::chrono::seconds;
  switch (t) {
    case Task::RemediationGen:
    case Task::JustificationGen:
    case Task::ASR:
      return seconds(10);
    case Task::MT:
      return seconds(5);
    default:
      return seconds(3);
  }
}

const std::vector<std::string>& BackendSet::violation_labels() {
  static const std::vector<std::string> labels{"false", "true"};
  return labels;
}

const std::vector<std::string>& BackendSet::impact_labels() {
  static const std::vector<std::string> labels{"Low", "High"};
  return labels;
}

BackendSet::BackendSet(CategorySet categories, GenerationGrammar grammar)
    : categories_(std::move(categories)), grammar_(std::move(grammar)) {}

std::shared_ptr<BackendSet> BackendSet::from_config(
    const json& backends, const std::filesystem::path& base_dir, CategorySet categories,
    const LanguagePair& langs, std::shared_ptr<const StageDelays> stage_delays,
    GenerationGrammar grammar) {
  auto set = std::make_shared<BackendSet>(std::move(categories), std::move(grammar));
  BuildContext ctx{base_dir, &set->categories_, langs, std::move(stage_delays)};
  if (!backends.is_null() && !backends.is_object()) {
    throw ConfigError("`backends` must be an object");
  }
  if (backends.is_object()) {
    for (const auto& item : backends.items()) {
      if (!parse_task(item.key())) {
        throw ConfigError("unknown backend task '" + item.key() + "'");
      }
    }
  }
  try {
    for (Task task : kAllTasks) {
      const std::string key(config_key(task));
      json entry = backends.is_object() && backends.contains(key) ? backends[key] : json::object();
      json primary = entry.contains("primary") ? entry["primary"] : json::object();
      TaskRoute route;
      route.task = task;
      route.primary = build(task, primary, ctx);
      route.primary_timeout = timeout_of(task, primary);
      if (entry.contains("backup") && !entry["backup"].is_null()) {
        route.backup = build(task, entry["backup"], ctx);
        route.backup_timeout = timeout_of(task, entry["backup"]);
      }
      set->set_route(std::move(route));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("backend config: ") + e.what());
  }
  return set;
}

void BackendSet::set_route(TaskRoute route) {
  if (!route.primary) {
    throw ConfigError(std::string(config_key(route.task)) + " has no primary backend");
  }
  routes_[route.task] = std::move(route);
}

const TaskRoute& BackendSet::route(Task t) const {
  auto it = routes_.find(t);
  if (it == routes_.end()) {
    throw ConfigError(std::string("no backend configured for ") + std::string(config_key(t)));
  }
  return it->second;
}

std::vector<double> BackendSet::decode_distribution(
    const BackendReply& reply, const std::vector<std::string>& labels) const {
  if (!reply.probs.empty()) {
    if (reply.probs.size() != labels.size()) {
      throw BackendError("expected " + std::to_string(labels.size()) +
                         " probabilities, got " + std::to_string(reply.probs.size()));
    }
    double sum = 0.0;
    for (double p : reply.probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw BackendError("invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw BackendError("probabilities do not sum to 1");
    return reply.probs;
  }
  if (!reply.label) throw BackendError("classifier reply has neither label nor probs");
  return ensemble::one_hot(index_in(labels, *reply.label), labels.size());
}

namespace {

// Class index: the label when present, else the argmax of the distribution.
std::size_t decided_class(const BackendReply& reply, const std::vector<std::string>& labels,
                          const std::vector<double>& probs) {
  if (reply.label) return index_in(labels, *reply.label);
  return ensemble::argmax(probs);
}

BackendReply canonicalized(Task task, BackendReply r) {
  if (r.label) r.label = canonical_label(task, *r.label);
  return r;
}

}  // namespace

void BackendSet::call_text(Task task, BackendRequest request, Executor& exec,
                           Callback<TextOutcome> done, bool parse_combined) {
  GenerationGrammar grammar = grammar_;
  auto validate = [parse_combined, grammar](const BackendReply& r) -> std::optional<std::string> {
    if (!r.text || r.text->empty()) return "empty text output";
    if (parse_combined && has_generation_labels(*r.text, grammar)) {
      try {
        parse_generation(*r.text, grammar);
      } catch (const ParseError& e) {
        return std::string(e.what());
      }
    }
    return std::nullopt;
  };
  invoke_with_fallback(
      route(task), std::move(request), exec, validate,
      [done = std::move(done), parse_combined, grammar](FallbackResult fr) {
        if (!fr.ok()) return done({std::nullopt, fr.error});
        TextOutcome out;
        out.provenance = fr.response->provenance;
        out.latency = fr.response->latency;
        const std::string& text = *fr.response->payload.text;
        if (parse_combined && has_generation_labels(text, grammar)) {
          auto parsed = parse_generation(text, grammar);
          out.text = std::move(parsed.remediation);
          out.justification = std::move(parsed.justification);
        } else {
          out.text = text;
        }
        done({std::move(out), {}});
      },
      &stats_);
}

void BackendSet::transcribe(const Utterance& current, Executor& exec,
                            Callback<TextOutcome> done) {
  BackendRequest req;
  req.current = current;
  call_text(Task::ASR, std::move(req), exec, std::move(done), false);
}

void BackendSet::translate(const Utterance& current, Executor& exec,
                           Callback<TextOutcome> done) {
  BackendRequest req;
  req.current = current;
  call_text(Task::MT, std::move(req), exec, std::move(done), false);
}

void BackendSet::classify_category(std::vector<Utterance> context, const Utterance& current,
                                   Executor& exec, Callback<CategoryOutcome> done) {
  if (!current.translated_text) {
    throw PreconditionError("category classification needs a translated utterance");
  }
  BackendRequest req;
  req.context = std::move(context);
  req.current = current;
  const auto& labels = categories_.names();
  auto validate = [this, &labels](const BackendReply& r) -> std::optional<std::string> {
    try {
      auto reply = canonicalized(Task::CategoryCls, r);
      decided_class(reply, labels, decode_distribution(reply, labels));
    } catch (const BackendError& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  };
  invoke_with_fallback(
      route(Task::CategoryCls), std::move(req), exec, validate,
      [this, &labels, done = std::move(done)](FallbackResult fr) {
        if (!fr.ok()) return done({std::nullopt, fr.error});
        auto reply = canonicalized(Task::CategoryCls, fr.response->payload);
        CategoryOutcome out;
        out.probs = decode_distribution(reply, labels);
        const auto idx = decided_class(reply, labels, out.probs);
        out.category = NormCategory{idx, labels[idx]};
        out.provenance = fr.response->provenance;
        done({std::move(out), {}});
      },
      &stats_);
}

void BackendSet::detect_violation(std::vector<Utterance> context, const Utterance& current,
                                  const NormCategory& category, Executor& exec,
                                  Callback<ViolationOutcome> done) {
  if (!current.translated_text) {
    throw PreconditionError("violation detection needs a translated utterance");
  }
  BackendRequest req;
  req.context = std::move(context);
  req.current = current;
  req.category = category.name;
  const auto& labels = violation_labels();
  auto validate = [this, &labels](const BackendReply& r) -> std::optional<std::string> {
    try {
      auto reply = canonicalized(Task::ViolationCls, r);
      decided_class(reply, labels, decode_distribution(reply, labels));
    } catch (const BackendError& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  };
  invoke_with_fallback(
      route(Task::ViolationCls), std::move(req), exec, validate,
      [this, &labels, done = std::move(done)](FallbackResult fr) {
        if (!fr.ok()) return done({std::nullopt, fr.error});
        auto reply = canonicalized(Task::ViolationCls, fr.response->payload);
        ViolationOutcome out;
        out.probs = decode_distribution(reply, labels);
        out.violated = decided_class(reply, labels, out.probs) == 1;
        out.provenance = fr.response->provenance;
        done({std::move(out), {}});
      },
      &stats_);
}

void BackendSet::classify_impact(std::vector<Utterance> window, Executor& exec,
                                 Callback<ImpactOutcome> done) {
  if (window.empty()) throw PreconditionError("impact window must hold the current utterance");
  BackendRequest req;
  req.current = window.back();
  window.pop_back();
  req.context = std::move(window);
  const auto& labels = impact_labels();
  auto validate = [this, &labels](const BackendReply& r) -> std::optional<std::string> {
    try {
      auto reply = canonicalized(Task::ImpactCls, r);
      decided_class(reply, labels, decode_distribution(reply, labels));
    } catch (const BackendError& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  };
  invoke_with_fallback(
      route(Task::ImpactCls), std::move(req), exec, validate,
      [this, &labels, done = std::move(done)](FallbackResult fr) {
        if (!fr.ok()) return done({std::nullopt, fr.error});
        auto reply = canonicalized(Task::ImpactCls, fr.response->payload);
        ImpactOutcome out;
        out.probs = decode_distribution(reply, labels);
        out.impact = decided_class(reply, labels, out.probs) == 1 ? Impact::High : Impact::Low;
        out.provenance = fr.response->provenance;
        done({std::move(out), {}});
      },
      &stats_);
}

void BackendSet::generate_remediation(std::vector<Utterance> context,
                                      const Utterance& current,
                                      const NormCategory& category, Executor& exec,
                                      Callback<TextOutcome> done) {
  BackendRequest req;
  req.context = std::move(context);
  req.current = current;
  req.category = category.name;
  call_text(Task::RemediationGen, std::move(req), exec, std::move(done), true);
}

void BackendSet::generate_justification(std::vector<Utterance> context,
                                        const Utterance& current,
                                        const NormCategory& category,
                                        std::string remediation, Executor& exec,
                                        Callback<TextOutcome> done) {
  BackendRequest req;
  req.context = std::move(context);
  req.current = current;
  req.category = category.name;
  req.remediation = std::move(remediation);
  call_text(Task::JustificationGen, std::move(req), exec, std::move(done), false);
}

}  // namespace nb::backends
