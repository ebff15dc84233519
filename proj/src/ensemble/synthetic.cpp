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

#include "normbridge/ensemble/synthetic.hpp"

#include <random>

#include "normbridge/core/error.hpp"

namespace nb::ensemble {

namespace {

// Spreads `mass` over every class except `peak` with +-50% jitter around an
// even split, keeping each share well below the peak's own mass.
void spread(std::vector<double>& probs, std::size_t peak, double mass,
            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  double total = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (c == peak) continue;
    probs[c] = jitter(rng);
    total += probs[c];
  }
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (c != peak) probs[c] *= mass / total;
  }
}

std::size_t other_than(std::size_t cls, std::size_t k, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, k - 2);
  std::size_t o = pick(rng);
  return o >= cls ? o + 1 : o;
}

}  // namespace

ComplementaryDataset make_complementary_dataset(const ComplementaryConfig& cfg) {
  const std::size_t k = cfg.classes;
  if (k < 2) throw PreconditionError("need at least two classes");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> gold_dist(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> confident(0.8, 0.95);
  // With two classes the wrong peak has to stay above one half.
  std::uniform_real_distribution<double> uncertain =
      k == 2 ? std::uniform_real_distribution<double>(0.55, 0.65)
             : std::uniform_real_distribution<double>(0.25, 0.35);

  ComplementaryDataset d;
  for (std::size_t i = 0; i < cfg.examples; ++i) {
    const std::size_t gold = gold_dist(rng);
    const double region = unit(rng);
    std::size_t a = gold;
    std::vector<double> probs(k, 0.0);
    std::size_t b_peak = gold;
    double peak_mass = confident(rng);
    if (region < cfg.both_right) {
      // both right
    } else if (region < cfg.both_right + cfg.only_a_right) {
      b_peak = other_than(gold, k, rng);
      peak_mass = uncertain(rng);
    } else {
      a = other_than(gold, k, rng);
    }
    probs[b_peak] = peak_mass;
    spread(probs, b_peak, 1.0 - peak_mass, rng);

    d.features.push_back(stack_features(one_hot(a, k), probs));
    d.labels.push_back(gold);
    d.base_a.push_back(a);
    d.base_b.push_back(argmax(probs));
  }
  return d;
}

}  // namespace nb::ensemble
