// Copyright 2026 The mfatigue Authors
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
#include <span>
#include <string>
#include <vector>

#include "mfatigue/datamodel.hpp"

namespace mfatigue {

using BitTrain = std::vector<std::uint8_t>;

/// Pooled activation train of the spinal modules.
struct SpikeTrain {
  BitTrain bits;
  int source_modules = 0;
};

struct Binarized {
  BitTrain bits;
  bool degenerate = false;  // constant row: no activation detected
};

/// Exact 1-D two-means: the optimal split of the sorted values; samples in
/// the higher-centroid cluster become 1.
Binarized binarize_module(std::span<const double> row);

enum class Pooling { Or, Concat };

Pooling pooling_from_string(const std::string& name);
std::string to_string(Pooling pooling);

/// Or: element-wise maximum across modules. Concat: trains laid end to end.
SpikeTrain pool_modules(const std::vector<BitTrain>& trains, Pooling mode = Pooling::Or);

/// Zero-run lengths strictly between consecutive ones (leading and trailing
/// runs excluded). Measured in samples.
std::vector<double> inter_spike_gaps(const BitTrain& bits);

/// Population std of the inter-spike gaps; 0 with fewer than two gaps.
double spike_timing_variability(const SpikeTrain& train);

/// Temporal coefficients (modules x samples) -> I_t.
double spike_variability_feature(const Matrix& c, Pooling mode = Pooling::Or);

}  // namespace mfatigue
