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

#include "normbridge/ensemble/stacking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "normbridge/core/error.hpp"

namespace nb::ensemble {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_dims(const StackingModel& model, const FeatureVector& f) {
  if (model.classes == 0 ||
      model.weights.size() != model.classes * model.feature_dim() ||
      model.bias.size() != model.classes) {
    throw DimensionError("malformed stacking model");
  }
  if (f.values.size() != model.feature_dim()) {
    throw DimensionError("feature length " + std::to_string(f.values.size()) +
                         " does not match model input " +
                         std::to_string(model.feature_dim()));
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() ||
      !std::isfinite(v)) {
    throw ParseError("bad number in model file: '" + token + "'");
  }
  return v;
}

}  // namespace

StackingModel StackingModel::zeros(std::size_t classes) {
  StackingModel m;
  m.classes = classes;
  m.weights.assign(classes * 2 * classes, 0.0);
  m.bias.assign(classes, 0.0);
  return m;
}

std::vector<double> one_hot(std::size_t index, std::size_t classes) {
  if (index >= classes) {
    throw PreconditionError("class index " + std::to_string(index) +
                            " out of range for " + std::to_string(classes) +
                            " classes");
  }
  std::vector<double> v(classes, 0.0);
  v[index] = 1.0;
  return v;
}

FeatureVector stack_features(std::span<const double> discrete,
                             std::span<const double> probs) {
  if (discrete.size() != probs.size() || discrete.empty()) {
    throw DimensionError("stacked blocks must have equal non-zero length (" +
                         std::to_string(discrete.size()) + " vs " +
                         std::to_string(probs.size()) + ")");
  }
  std::size_t ones = 0;
  for (double d : discrete) {
    if (d == 1.0) {
      ++ones;
    } else if (d != 0.0) {
      ones = 2;
      break;
    }
  }
  if (ones != 1) throw PreconditionError("discrete block is not one-hot");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw PreconditionError("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw PreconditionError("probability block does not sum to 1");
  }
  FeatureVector f;
  f.values.reserve(discrete.size() * 2);
  f.values.insert(f.values.end(), discrete.begin(), discrete.end());
  f.values.insert(f.values.end(), probs.begin(), probs.end());
  return f;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> logits(const StackingModel& model, const FeatureVector& f) {
  check_dims(model, f);
  const std::size_t dim = model.feature_dim();
  std::vector<double> z(model.classes);
  for (std::size_t c = 0; c < model.classes; ++c) {
    double acc = model.bias[c];
    for (std::size_t j = 0; j < dim; ++j) acc += model.weight(c, j) * f.values[j];
    z[c] = acc;
  }
  return z;
}

Prediction predict(const StackingModel& model, const FeatureVector& f) {
  Prediction p;
  p.distribution = softmax(logits(model, f));
  p.label = argmax(p.distribution);
  return p;
}

LossGradient loss_and_gradient(const StackingModel& model,
                               std::span<const FeatureVector> features,
                               std::span<const std::size_t> labels, double l2) {
  if (features.size() != labels.size() || features.empty()) {
    throw DimensionError("features and labels must be aligned and non-empty");
  }
  const std::size_t k = model.classes;
  const std::size_t dim = model.feature_dim();
  LossGradient g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(k, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.size());

  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (labels[i] >= k) throw PreconditionError("label out of range");
    auto z = logits(model, f);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double log_norm = mx + std::log(sum);
    g.loss += (log_norm - z[labels[i]]) * inv_n;
    for (std::size_t c = 0; c < k; ++c) {
      const double residual =
          std::exp(z[c] - log_norm) - (c == labels[i] ? 1.0 : 0.0);
      g.bias[c] += residual * inv_n;
      for (std::size_t j = 0; j < dim; ++j) {
        g.weights[c * dim + j] += residual * f.values[j] * inv_n;
      }
    }
  }
  for (std::size_t w = 0; w < model.weights.size(); ++w) {
    g.loss += 0.5 * l2 * model.weights[w] * model.weights[w];
    g.weights[w] += l2 * model.weights[w];
  }
  return g;
}

StackingModel train_stacker(std::span<const FeatureVector> features,
                            std::span<const std::size_t> labels,
                            const TrainConfig& config,
                            std::vector<double>* loss_trace) {
  if (features.empty() || features.size() != labels.size()) {
    throw DimensionError("features and labels must be aligned and non-empty");
  }
  const std::size_t dim = features.front().values.size();
  if (dim == 0 || dim % 2 != 0) {
    throw DimensionError("feature length must be a positive even number");
  }
  for (const auto& f : features) {
    if (f.values.size() != dim) throw DimensionError("ragged feature vectors");
  }
  const std::size_t k = dim / 2;

  StackingModel model = StackingModel::zeros(k);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  for (double& w : model.weights) w = init(rng);

  std::set<std::size_t> seen(labels.begin(), labels.end());
  model.degenerate = seen.size() < k;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    auto g = loss_and_gradient(model, features, labels, config.l2);
    if (loss_trace) loss_trace->push_back(g.loss);
    for (std::size_t w = 0; w < model.weights.size(); ++w) {
      model.weights[w] -= config.learning_rate * g.weights[w];
    }
    for (std::size_t c = 0; c < k; ++c) {
      model.bias[c] -= config.learning_rate * g.bias[c];
    }
  }
  if (loss_trace) {
    loss_trace->push_back(
        loss_and_gradient(model, features, labels, config.l2).loss);
  }
  return model;
}

void save_model(const StackingModel& model, std::ostream& out) {
  const std::size_t dim = model.feature_dim();
  out << model.classes << '\n';
  for (std::size_t c = 0; c < model.classes; ++c) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (j) out << ' ';
      out << format_double(model.weight(c, j));
    }
    out << '\n';
  }
  for (std::size_t c = 0; c < model.classes; ++c) {
    if (c) out << ' ';
    out << format_double(model.bias[c]);
  }
  out << '\n';
}

StackingModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty model file");
  std::size_t k = 0;
  {
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), k);
    if (ec != std::errc{} || ptr != line.data() + line.size() || k == 0) {
      throw ParseError("bad class count in model file: '" + line + "'");
    }
  }
  auto read_row = [&](std::size_t expected, const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(std::string("model file truncated at ") + what);
    }
    std::istringstream row(line);
    std::vector<double> vals;
    std::string tok;
    while (row >> tok) vals.push_back(parse_double(tok));
    if (vals.size() != expected) {
      throw ParseError(std::string("model file: wrong length for ") + what);
    }
    return vals;
  };
  StackingModel model = StackingModel::zeros(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto row = read_row(2 * k, "weights");
    std::copy(row.begin(), row.end(), model.weights.begin() + c * 2 * k);
  }
  model.bias = read_row(k, "bias");
  return model;
}

void save_model(const StackingModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save_model(model, out);
}

StackingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return load_model(in);
}

}  // namespace nb::ensemble
