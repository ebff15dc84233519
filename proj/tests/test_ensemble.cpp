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

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "normbridge/core/error.hpp"
#include "normbridge/ensemble/dataset.hpp"
#include "normbridge/ensemble/stacking.hpp"
#include "normbridge/ensemble/synthetic.hpp"
#include "normbridge/eval/metrics.hpp"
#include "oracles.hpp"

using namespace nb;
using namespace nb::ensemble;

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) s += (x = u(rng));
  for (auto& x : v) x /= s;
  return v;
}

FeatureVector random_feature(std::mt19937_64& rng, std::size_t k) {
  const auto oh = one_hot(rng() % k, k);
  const auto p = random_distribution(rng, k);
  return stack_features(oh, p);
}

std::vector<std::vector<double>> raw(const std::vector<FeatureVector>& f) {
  std::vector<std::vector<double>> out;
  for (const auto& x : f) out.push_back(x.values);
  return out;
}

double accuracy_of(const StackingModel& m, const std::vector<FeatureVector>& f,
                   const std::vector<std::size_t>& y) {
  std::vector<std::size_t> preds;
  for (const auto& x : f) preds.push_back(predict(m, x).label);
  return oracle::accuracy(preds, y);
}

}  // namespace

TEST_CASE("one_hot") {
  CHECK(one_hot(0, 8) == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(one_hot(7, 8) == std::vector<double>{0, 0, 0, 0, 0, 0, 0, 1});
  CHECK_THROWS_AS(one_hot(8, 8), PreconditionError);
}

TEST_CASE("stack_features") {
  std::mt19937_64 rng(1);
  auto f8 = stack_features(one_hot(3, 8), random_distribution(rng, 8));
  CHECK(f8.values.size() == 16);
  CHECK(f8.classes() == 8);
  CHECK(f8.values[3] == 1.0);
  auto f2 = stack_features(one_hot(1, 2), std::vector<double>{0.4, 0.6});
  CHECK(f2.values == std::vector<double>{0, 1, 0.4, 0.6});
  CHECK_THROWS_AS(stack_features(one_hot(1, 2), std::vector<double>{0.2, 0.3, 0.5}), DimensionError);
  CHECK_THROWS_AS(stack_features(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}),
                  PreconditionError);
  CHECK_THROWS_AS(stack_features(one_hot(0, 2), std::vector<double>{0.5, 0.6}), PreconditionError);
}

TEST_CASE("predict") {
  auto zero = StackingModel::zeros(8);
  std::mt19937_64 rng(3);
  auto f = random_feature(rng, 8);
  auto p = predict(zero, f);
  CHECK(p.label == 0);
  for (double x : p.distribution) CHECK(x == doctest::Approx(0.125));

  auto copy_a = StackingModel::zeros(8);
  for (std::size_t c = 0; c < 8; ++c) copy_a.weight(c, c) = 10.0;
  for (int i = 0; i < 50; ++i) {
    auto x = random_feature(rng, 8);
    auto pr = predict(copy_a, x);
    CHECK(pr.label == argmax(std::span(x.values).first(8)));
    double s = 0;
    for (double v : pr.distribution) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
  CHECK_THROWS_AS(predict(copy_a, FeatureVector{{1, 0, 0.5, 0.5}}), DimensionError);
  CHECK(argmax(std::vector<double>{1, 3, 3}) == 1);
}

TEST_CASE("softmax is shift invariant") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    StackingModel m = StackingModel::zeros(4);
    for (auto& w : m.weights) w = n(rng);
    for (auto& b : m.bias) b = n(rng);
    auto f = random_feature(rng, 4);
    auto before = predict(m, f).distribution;
    const double shift = n(rng) * 100;
    for (auto& b : m.bias) b += shift;
    auto after = predict(m, f).distribution;
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(before[i] - after[i]) <= 1e-12);
  }
  auto big = softmax(std::vector<double>{1000, 1000});
  CHECK(big[0] == doctest::Approx(0.5));
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + trial % 4;
    StackingModel m = StackingModel::zeros(k);
    for (auto& w : m.weights) w = n(rng);
    for (auto& b : m.bias) b = n(rng);
    std::vector<FeatureVector> f;
    std::vector<std::size_t> y;
    for (int i = 0; i < 6; ++i) {
      f.push_back(random_feature(rng, k));
      y.push_back(rng() % k);
    }
    const double l2 = 1e-3;
    auto g = loss_and_gradient(m, f, y, l2);
    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = loss_and_gradient(m, f, y, l2).loss;
      param = keep - h;
      const double down = loss_and_gradient(m, f, y, l2).loss;
      param = keep;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      CHECK(rel < 1e-5);
    };
    for (std::size_t i = 0; i < m.weights.size(); ++i) check(m.weights[i], g.weights[i]);
    for (std::size_t i = 0; i < m.bias.size(); ++i) check(m.bias[i], g.bias[i]);
  }
}

TEST_CASE("loss is non-increasing at lr 0.01") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto ds = make_complementary_dataset({8, 300, 0.3, 0.35, seed});
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 200;
    std::vector<double> trace;
    train_stacker(ds.features, ds.labels, cfg, &trace);
    REQUIRE(trace.size() == 201);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  }
}

TEST_CASE("copy-A labels are learned perfectly") {
  std::mt19937_64 rng(5);
  std::vector<FeatureVector> f;
  std::vector<std::size_t> y;
  for (int i = 0; i < 200; ++i) {
    f.push_back(random_feature(rng, 8));
    y.push_back(argmax(std::span(f.back().values).first(8)));
  }
  auto m = train_stacker(f, y, {});
  CHECK_FALSE(m.degenerate);
  CHECK(accuracy_of(m, f, y) == 1.0);
}

TEST_CASE("single-class data yields a flagged model") {
  std::vector<FeatureVector> f(10, stack_features(one_hot(2, 4), std::vector<double>{0.1, 0.2, 0.3, 0.4}));
  std::vector<std::size_t> y(10, 2);
  auto m = train_stacker(f, y, {});
  CHECK(m.degenerate);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) CHECK(predict(m, random_feature(rng, 4)).label == 2);
}

TEST_CASE("training preconditions") {
  std::vector<FeatureVector> f{stack_features(one_hot(0, 2), std::vector<double>{0.5, 0.5})};
  std::vector<std::size_t> y{0, 1};
  CHECK_THROWS_AS(train_stacker(f, y, {}), DimensionError);
  CHECK_THROWS_AS(train_stacker({}, {}, {}), DimensionError);
  y = {5};
  CHECK_THROWS_AS(train_stacker(f, y, {}), PreconditionError);
}

TEST_CASE("complementary errors: stacker beats both bases") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto ds = make_complementary_dataset({8, 1000, 0.3, 0.35, seed});
    REQUIRE(oracle::separating_vote_weight(raw(ds.features), ds.labels));

    // Base errors are disjoint by construction.
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      CHECK((ds.base_a[i] == ds.labels[i] || ds.base_b[i] == ds.labels[i]));
    }
    auto [train, test] = holdout_split(ds.labels.size(), 0.3, seed);
    std::vector<FeatureVector> ftr, fte;
    std::vector<std::size_t> ytr, yte, a, b;
    for (auto i : train) {
      ftr.push_back(ds.features[i]);
      ytr.push_back(ds.labels[i]);
    }
    for (auto i : test) {
      fte.push_back(ds.features[i]);
      yte.push_back(ds.labels[i]);
      a.push_back(ds.base_a[i]);
      b.push_back(ds.base_b[i]);
    }
    TrainConfig cfg;
    cfg.seed = seed;
    auto m = train_stacker(ftr, ytr, cfg);
    std::vector<std::size_t> s;
    for (const auto& x : fte) s.push_back(predict(m, x).label);
    const double fs = eval::micro_prf(s, yte, 8).f1_micro;
    const double fa = eval::micro_prf(a, yte, 8).f1_micro;
    const double fb = eval::micro_prf(b, yte, 8).f1_micro;
    CAPTURE(seed);
    CHECK(fs >= fa + 0.05);
    CHECK(fs >= fb + 0.05);
  }
}

TEST_CASE("training is deterministic per seed") {
  auto ds = make_complementary_dataset({4, 200, 0.3, 0.35, 4});
  TrainConfig cfg;
  cfg.seed = 12;
  cfg.epochs = 50;
  auto m1 = train_stacker(ds.features, ds.labels, cfg);
  auto m2 = train_stacker(ds.features, ds.labels, cfg);
  CHECK(m1.weights == m2.weights);
  CHECK(m1.bias == m2.bias);
  cfg.seed = 13;
  CHECK(train_stacker(ds.features, ds.labels, cfg).weights != m1.weights);
}

TEST_CASE("model save and load") {
  auto ds = make_complementary_dataset({3, 60, 0.3, 0.35, 2});
  TrainConfig cfg;
  cfg.epochs = 20;
  auto m = train_stacker(ds.features, ds.labels, cfg);
  std::stringstream ss;
  save_model(m, ss);
  auto back = load_model(ss);
  CHECK(back.classes == 3);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);

  std::stringstream text;
  save_model(m, text);
  std::istringstream head(text.str());
  std::size_t k = 0;
  head >> k;
  CHECK(k == 3);

  std::istringstream truncated("3\n1 2 3\n");
  CHECK_THROWS_AS(load_model(truncated), ParseError);
  std::istringstream junk("x\n");
  CHECK_THROWS_AS(load_model(junk), ParseError);
}

TEST_CASE("dataset io") {
  auto ds = make_complementary_dataset({3, 40, 0.3, 0.35, 6});
  std::stringstream fs, ls;
  write_features(fs, ds.features);
  write_labels(ls, ds.labels);
  auto f = read_features(fs);
  auto l = read_labels(ls);
  REQUIRE(f.size() == ds.features.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i].values == ds.features[i].values);
  CHECK(l == ds.labels);
  CHECK(base_predictions(f, true) == ds.base_a);
  CHECK(base_predictions(f, false) == ds.base_b);

  std::istringstream ragged("1 0 0.5 0.5\n1 0 0.5\n");
  try {
    read_features(ragged);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream bad_label("0\nx\n");
  CHECK_THROWS_AS(read_labels(bad_label), ParseError);

  auto [train, test] = holdout_split(10, 0.3, 1);
  CHECK(test.size() == 3);
  CHECK(train.size() == 7);
  auto [train2, test2] = holdout_split(10, 0.3, 1);
  CHECK(test == test2);
  std::vector<std::size_t> all(train.begin(), train.end());
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
}
