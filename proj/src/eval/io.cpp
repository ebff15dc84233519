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

#include "normbridge/eval/io.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "normbridge/core/error.hpp"
#include "normbridge/eval/text.hpp"

namespace nb::eval {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::vector<PredictionRow> read_predictions(std::istream& in) {
  std::vector<PredictionRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(fmt::format("line {}: expected 3 tab-separated fields, got {}", n,
                                   fields.size()));
    }
    if (fields[0].empty()) throw ParseError(fmt::format("line {}: empty id", n));
    try {
      nfc(line);
    } catch (const Error& e) {
      throw ParseError(fmt::format("line {}: {}", n, e.what()));
    }
    rows.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  return rows;
}

EvalReport evaluate_predictions(const std::vector<PredictionRow>& rows,
                                const EvalOptions& options) {
  if (rows.empty()) throw PreconditionError("no prediction records");
  EvalReport r;
  r.items = rows.size();
  if (options.prf) {
    std::set<std::string> seen;
    for (const auto& row : rows) {
      seen.insert(row.pred);
      seen.insert(row.gold);
    }
    r.labels.assign(seen.begin(), seen.end());
    auto index = [&](const std::string& s) {
      return static_cast<std::size_t>(
          std::lower_bound(r.labels.begin(), r.labels.end(), s) - r.labels.begin());
    };
    std::vector<std::size_t> preds, golds;
    for (const auto& row : rows) {
      preds.push_back(index(row.pred));
      golds.push_back(index(row.gold));
    }
    r.classification = micro_prf(preds, golds, r.labels.size());
  }
  if (options.bleu || options.rouge) {
    std::vector<Tokens> cands, refs;
    for (const auto& row : rows) {
      cands.push_back(tokenize(row.pred));
      refs.push_back(tokenize(row.gold));
    }
    if (options.bleu) r.bleu = bleu(cands, refs, options.bleu_max_n, options.smoothing);
    if (options.rouge) {
      double sum = 0.0;
      for (std::size_t i = 0; i < cands.size(); ++i) sum += rouge_l_f1(cands[i], refs[i]);
      r.rouge_l = sum / static_cast<double>(cands.size());
    }
  }
  if (options.kappa) {
    std::vector<std::string> a, b;
    for (const auto& row : rows) {
      a.push_back(row.pred);
      b.push_back(row.gold);
    }
    r.kappa = cohens_kappa(a, b);
  }
  return r;
}

std::string format_report(const EvalReport& report, bool percent) {
  const double scale = percent ? 100.0 : 1.0;
  auto score = [&](double v) {
    return percent ? fmt::format("{:.2f}", v * scale) : fmt::format("{:.4f}", v);
  };
  std::string out;
  auto row = [&](std::string_view name, const std::string& value) {
    out += fmt::format("{:<22}{:>12}\n", name, value);
  };
  if (report.items > 0) row("items", std::to_string(report.items));
  if (report.classification) {
    row("P", score(report.classification->precision));
    row("R", score(report.classification->recall));
    row("F1-Micro", score(report.classification->f1_micro));
  }
  if (report.bleu) row("BLEU", score(*report.bleu));
  if (report.rouge_l) row("ROUGE-L", score(*report.rouge_l));
  if (report.kappa) row("kappa", fmt::format("{:.4f}", *report.kappa));
  if (report.choices) {
    row("low-impact", std::to_string(report.choices->low_impact));
    row("high-impact", std::to_string(report.choices->high_impact));
    row("remediation chosen", std::to_string(report.choices->remediation_chosen));
    row("remediation ratio",
        report.choices->ratio ? fmt::format("{:.4f}", *report.choices->ratio) : "n/a");
  }
  for (const auto& [path, mean] : report.latency) {
    row(fmt::format("latency {}", to_string(path)), fmt::format("{:.3f} s", to_seconds(mean)));
  }
  return out;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (report.items > 0) j["items"] = report.items;
  if (report.classification) {
    const auto& c = *report.classification;
    nlohmann::ordered_json cls;
    cls["precision"] = c.precision;
    cls["recall"] = c.recall;
    cls["f1_micro"] = c.f1_micro;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < report.labels.size() && i < c.per_class.size(); ++i) {
      per_class[report.labels[i]] = {{"tp", c.per_class[i].tp},
                                     {"fp", c.per_class[i].fp},
                                     {"fn", c.per_class[i].fn}};
    }
    cls["per_class"] = std::move(per_class);
    j["classification"] = std::move(cls);
  }
  if (report.bleu) j["bleu"] = *report.bleu;
  if (report.rouge_l) j["rouge_l_f1"] = *report.rouge_l;
  if (report.kappa) j["kappa"] = *report.kappa;
  if (report.choices) {
    const auto& s = *report.choices;
    j["choices"] = {{"low_impact", s.low_impact},
                    {"high_impact", s.high_impact},
                    {"remediation_chosen", s.remediation_chosen},
                    {"ratio", s.ratio ? nlohmann::ordered_json(*s.ratio) : nlohmann::ordered_json(nullptr)}};
  }
  if (!report.latency.empty()) {
    nlohmann::ordered_json lat = nlohmann::ordered_json::object();
    for (const auto& [path, mean] : report.latency) {
      lat[std::string(to_string(path))] = to_ms(mean);
    }
    j["latency_mean_ms"] = std::move(lat);
  }
  return j;
}

}  // namespace nb::eval
