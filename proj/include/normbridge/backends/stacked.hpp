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

#include <memory>
#include <string>
#include <vector>

#include "normbridge/backends/backend.hpp"
#include "normbridge/ensemble/stacking.hpp"

namespace nb::backends {

/// Classifier that queries a discrete and a probabilistic base model and
/// fuses their outputs with a trained stacking model. The discrete output is
/// lifted to one-hot; a probabilistic model that only returns a label is
/// lifted the same way.
class StackedClassifier final : public Backend {
 public:
  StackedClassifier(std::shared_ptr<Backend> discrete,
                    std::shared_ptr<Backend> probabilistic,
                    ensemble::StackingModel model, std::vector<std::string> labels);

  void invoke(const BackendRequest& request, Executor& exec,
              Completion done) override;
  std::string describe() const override;

  /// Distribution over `labels` from a base reply; throws BackendError when
  /// the reply names an unknown label or carries a malformed vector.
  static std::vector<double> lift(const BackendReply& reply,
                                  const std::vector<std::string>& labels);

 private:
  std::shared_ptr<Backend> discrete_;
  std::shared_ptr<Backend> probabilistic_;
  ensemble::StackingModel model_;
  std::vector<std::string> labels_;
};

}  // namespace nb::backends
