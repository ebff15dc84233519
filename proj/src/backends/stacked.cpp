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

#include "normbridge/backends/stacked.hpp"

#include <algorithm>
#include <cmath>

#include "normbridge/core/error.hpp"

namespace nb::backends {

StackedClassifier::StackedClassifier(std::shared_ptr<Backend> discrete,
                                     std::shared_ptr<Backend> probabilistic,
                                     ensemble::StackingModel model,
                                     std::vector<std::string> labels)
    : discrete_(std::move(discrete)), probabilistic_(std::move(probabilistic)),
      model_(std::move(model)), labels_(std::move(labels)) {
  if (model_.classes != labels_.size()) {
    throw ConfigError("stacking model has " + std::to_string(model_.classes) +
                      " classes, task has " + std::to_string(labels_.size()));
  }
}

std::string StackedClassifier::describe() const {
  return "stacked(" + discrete_->describe() + "," + probabilistic_->describe() + ")";
}

std::vector<double> StackedClassifier::lift(const BackendReply& reply,
                                            const std::vector<std::string>& labels) {
  if (!reply.probs.empty()) {
    if (reply.probs.size() != labels.size()) {
      throw BackendError("probability vector has wrong length");
    }
    double sum = 0.0;
    for (double p : reply.probs) {
      if (!(p >= 0.0)) throw BackendError("negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw BackendError("probabilities do not sum to 1");
    return reply.probs;
  }
  if (!reply.label) throw BackendError("classifier reply has no label");
  auto it = std::find(labels.begin(), labels.end(), *reply.label);
  if (it == labels.end()) throw BackendError("unknown label '" + *reply.label + "'");
  return ensemble::one_hot(static_cast<std::size_t>(it - labels.begin()), labels.size());
}

void StackedClassifier::invoke(const BackendRequest& request, Executor& exec,
                               Completion done) {
  struct Join {
    std::optional<Outcome> discrete, probabilistic;
    Completion done;
  };
  auto join = std::make_shared<Join>();
  join->done = std::move(done);

  auto finish = [this, join] {
    if (!join->discrete || !join->probabilistic) return;
    auto d = std::move(*join->discrete);
    auto p = std::move(*join->probabilistic);
    if (!d.succeeded()) return join->done(Outcome::fail("discrete base: " + d.error));
    if (!p.succeeded()) return join->done(Outcome::fail("probabilistic base: " + p.error));
    try {
      auto discrete = lift(*d.reply, labels_);
      // The discrete block must be one-hot even if the base sent a vector.
      discrete = ensemble::one_hot(ensemble::argmax(discrete), labels_.size());
      const auto probs = lift(*p.reply, labels_);
      const auto pred = ensemble::predict(model_, ensemble::stack_features(discrete, probs));
      BackendReply r;
      r.label = labels_[pred.label];
      r.probs = pred.distribution;
      join->done(Outcome::ok(std::move(r)));
    } catch (const std::exception& e) {
      join->done(Outcome::fail(e.what()));
    }
  };
  discrete_->invoke(request, exec, [join, finish](Outcome o) {
    join->discrete = std::move(o);
    finish();
  });
  probabilistic_->invoke(request, exec, [join, finish](Outcome o) {
    join->probabilistic = std::move(o);
    finish();
  });
}

}  // namespace nb::backends
