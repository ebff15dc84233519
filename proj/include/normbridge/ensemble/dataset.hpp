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

#include <cstdint>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

#include "normbridge/ensemble/stacking.hpp"

namespace nb::ensemble {

/// One feature vector per line: 2K whitespace-separated numbers. Throws
/// ParseError naming the 1-based line for bad numbers or ragged rows.
std::vector<FeatureVector> read_features(std::istream& in);
/// One class index per line.
std::vector<std::size_t> read_labels(std::istream& in);
void write_features(std::ostream& out, const std::vector<FeatureVector>& features);
void write_labels(std::ostream& out, const std::vector<std::size_t>& labels);

/// Seeded shuffle of 0..n-1 split into (train, held-out) with
/// round(n * fraction) held out.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(
    std::size_t n, double fraction, std::uint64_t seed);

/// Argmax of the one-hot and of the distribution block of each vector.
std::vector<std::size_t> base_predictions(const std::vector<FeatureVector>& features,
                                          bool discrete_block);

}  // namespace nb::ensemble
