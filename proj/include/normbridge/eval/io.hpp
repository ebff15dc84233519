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

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "normbridge/eval/metrics.hpp"
#include "normbridge/eval/study.hpp"

namespace nb::eval {

/// One `id<TAB>pred<TAB>gold` record.
struct PredictionRow {
  std::string id;
  std::string pred;
  std::string gold;
};

/// Skips blank lines and `#` comments. Throws ParseError naming the 1-based
/// line for records without exactly three fields, an empty id or invalid
/// UTF-8.
std::vector<PredictionRow> read_predictions(std::istream& in);

/// Everything `normbridge eval` can report. Unset parts were not requested.
struct EvalReport {
  std::size_t items = 0;
  std::vector<std::string> labels;  // class index order for `classification`
  std::optional<MetricsReport> classification;
  std::optional<double> bleu;
  std::optional<double> rouge_l;
  std::optional<double> kappa;
  std::optional<ChoiceStats> choices;
  std::map<LatencyPath, Duration> latency;
};

struct EvalOptions {
  bool prf = true;
  bool bleu = false;
  bool rouge = false;
  bool kappa = false;
  std::size_t bleu_max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::None;
};

/// Label-level metrics treat pred/gold as class labels (indexed in sorted
/// order); BLEU and ROUGE-L tokenize them as text.
EvalReport evaluate_predictions(const std::vector<PredictionRow>& rows,
                                const EvalOptions& options);

/// Human-readable table. With `percent`, P/R/F1, BLEU and ROUGE-L are shown
/// x100 with two decimals.
std::string format_report(const EvalReport& report, bool percent);
/// Raw 0-1 values; latency in milliseconds.
nlohmann::ordered_json report_json(const EvalReport& report);

}  // namespace nb::eval
