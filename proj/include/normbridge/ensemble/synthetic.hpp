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
#include <cstdint>
#include <vector>

#include "normbridge/ensemble/stacking.hpp"

namespace nb::ensemble {

/// Synthetic stacking data where each base model is right exactly where the
/// other is wrong, and the feature vector reveals which case applies:
///
///  - both right: A's one-hot and a confident B agree on the gold class;
///  - only B right: B is confident (peak >= `confident_floor`) on gold while
///    A names a different class;
///  - only A right: B spreads its mass and peaks (below `uncertain_ceiling`)
///    on a wrong class.
struct ComplementaryDataset {
  std::vector<FeatureVector> features;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> base_a;  // argmax of the one-hot block
  std::vector<std::size_t> base_b;  // argmax of the distribution block
};

struct ComplementaryConfig {
  std::size_t classes = 8;
  std::size_t examples = 1000;
  double both_right = 0.3;
  double only_a_right = 0.35;  // remainder: only B right
  std::uint64_t seed = 1;
};

ComplementaryDataset make_complementary_dataset(const ComplementaryConfig& cfg);

}  // namespace nb::ensemble
