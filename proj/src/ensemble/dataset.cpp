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

#include "normbridge/ensemble/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "normbridge/core/error.hpp"

namespace nb::ensemble {

namespace {

template <class T>
T parse_number(const std::string& tok, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<FeatureVector> read_features(std::istream& in) {
  std::vector<FeatureVector> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream fields(line);
    std::string tok;
    FeatureVector f;
    while (fields >> tok) f.values.push_back(parse_number<double>(tok, n));
    if (f.values.empty()) continue;
    if (f.values.size() % 2 != 0) {
      throw ParseError("line " + std::to_string(n) + ": odd feature count " +
                       std::to_string(f.values.size()));
    }
    if (!out.empty() && f.values.size() != out.front().values.size()) {
      throw ParseError("line " + std::to_string(n) + ": expected " +
                       std::to_string(out.front().values.size()) + " features, got " +
                       std::to_string(f.values.size()));
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::size_t> read_labels(std::istream& in) {
  std::vector<std::size_t> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream fields(line);
    std::string tok, extra;
    if (!(fields >> tok)) continue;
    if (fields >> extra) {
      throw ParseError("line " + std::to_string(n) + ": expected a single label");
    }
    out.push_back(parse_number<std::size_t>(tok, n));
  }
  return out;
}

void write_features(std::ostream& out, const std::vector<FeatureVector>& features) {
  for (const auto& f : features) {
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      out << (i ? " " : "") << shortest(f.values[i]);
    }
    out << '\n';
  }
}

void write_labels(std::ostream& out, const std::vector<std::size_t>& labels) {
  for (auto l : labels) out << l << '\n';
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(
    std::size_t n, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw PreconditionError("held-out fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the split is portable.
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng() % i]);
  }
  const auto held = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(held), idx.end());
  return {std::move(train), std::move(test)};
}

std::vector<std::size_t> base_predictions(const std::vector<FeatureVector>& features,
                                          bool discrete_block) {
  std::vector<std::size_t> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    const auto k = f.classes();
    std::span<const double> all(f.values);
    out.push_back(argmax(discrete_block ? all.first(k) : all.subspan(k, k)));
  }
  return out;
}

}  // namespace nb::ensemble
