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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nb::eval {

using Tokens = std::vector<std::string>;

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1_micro = 0.0;
  std::size_t total = 0;
  std::vector<ClassCounts> per_class;
};

/// Micro-averaged precision/recall/F1 over single-label predictions. For
/// single-label multiclass data all three equal accuracy.
MetricsReport micro_prf(std::span<const std::size_t> preds,
                        std::span<const std::size_t> golds, std::size_t classes);

enum class BleuSmoothing { None, AddOne };

/// Corpus BLEU with one reference per candidate: clipped n-gram precisions
/// pooled over the corpus, geometric mean up to `max_n`, times the brevity
/// penalty exp(min(0, 1 - r/c)). Unsmoothed, any zero precision yields 0.
/// AddOne smoothing applies (m + 1) / (t + 1) to orders 2 and above.
double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references,
            std::size_t max_n = 4, BleuSmoothing smoothing = BleuSmoothing::None);

/// Sentence-level ROUGE-L F1 from the longest common subsequence.
double rouge_l_f1(std::span<const std::string> candidate,
                  std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

/// Cohen's kappa for two raters over the same items.
double cohens_kappa(std::span<const std::string> rater_a,
                    std::span<const std::string> rater_b);

}  // namespace nb::eval
