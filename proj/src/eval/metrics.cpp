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

#include "normbridge/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "normbridge/core/error.hpp"

namespace nb::eval {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

MetricsReport micro_prf(std::span<const std::size_t> preds,
                        std::span<const std::size_t> golds, std::size_t classes) {
  if (preds.size() != golds.size()) {
    throw DimensionError("predictions and golds differ in length");
  }
  if (preds.empty()) throw PreconditionError("micro_prf on empty input");
  MetricsReport r;
  r.total = preds.size();
  r.per_class.assign(classes, {});
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= classes || golds[i] >= classes) {
      throw PreconditionError("class index out of range");
    }
    if (preds[i] == golds[i]) {
      ++r.per_class[golds[i]].tp;
    } else {
      ++r.per_class[preds[i]].fp;
      ++r.per_class[golds[i]].fn;
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& c : r.per_class) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (r.precision == r.recall) {
    r.f1_micro = r.precision;  // the harmonic mean of equal values, without rounding
  } else {
    r.f1_micro = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references,
            std::size_t max_n, BleuSmoothing smoothing) {
  if (candidates.size() != references.size()) {
    throw DimensionError("candidates and references are not aligned");
  }
  if (candidates.empty()) throw PreconditionError("BLEU on empty corpus");
  if (max_n == 0) throw PreconditionError("BLEU needs max_n >= 1");

  std::vector<std::size_t> matched(max_n + 1, 0);
  std::vector<std::size_t> total(max_n + 1, 0);
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto cand = count_ngrams(candidates[i], n);
      const auto ref = count_ngrams(references[i], n);
      for (const auto& [gram, count] : cand) {
        total[n] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matched[n] += std::min(count, it->second);
      }
    }
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    double m = static_cast<double>(matched[n]);
    double t = static_cast<double>(total[n]);
    if (smoothing == BleuSmoothing::AddOne && n > 1) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double ratio = static_cast<double>(ref_len) / static_cast<double>(cand_len);
  const double log_bp = std::min(0.0, 1.0 - ratio);
  return std::exp(log_sum / static_cast<double>(max_n) + log_bp);
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(std::span<const std::string> candidate,
                  std::span<const std::string> reference) {
  if (reference.empty()) throw PreconditionError("ROUGE-L with empty reference");
  const std::size_t l = lcs_length(candidate, reference);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(candidate.size());
  const double r = static_cast<double>(l) / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double cohens_kappa(std::span<const std::string> rater_a,
                    std::span<const std::string> rater_b) {
  if (rater_a.size() != rater_b.size()) {
    throw DimensionError("raters labelled different numbers of items");
  }
  if (rater_a.empty()) throw PreconditionError("kappa on empty ratings");
  std::map<std::string, std::size_t> count_a, count_b;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    ++count_a[rater_a[i]];
    ++count_b[rater_b[i]];
    if (rater_a[i] == rater_b[i]) ++agree;
  }
  // kappa = (N * agree - sum_c a_c b_c) / (N^2 - sum_c a_c b_c), in integers
  // so only the final division rounds.
  const auto n = static_cast<std::uint64_t>(rater_a.size());
  std::uint64_t chance = 0;
  for (const auto& [label, ca] : count_a) {
    auto it = count_b.find(label);
    if (it != count_b.end()) chance += static_cast<std::uint64_t>(ca) * it->second;
  }
  if (chance == n * n) return 1.0;  // both raters used one identical label
  const auto num = static_cast<double>(static_cast<std::int64_t>(n * agree) -
                                       static_cast<std::int64_t>(chance));
  return num / static_cast<double>(n * n - chance);
}

}  // namespace nb::eval
