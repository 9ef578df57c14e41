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

#include "mfatigue/spinal.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"

namespace mfatigue {

Binarized binarize_module(std::span<const double> row) {
  if (row.empty()) throw Error(ErrorCode::EmptyInput, "cannot binarize an empty row");
  std::vector<double> s(row.begin(), row.end());
  std::sort(s.begin(), s.end());
  Binarized out;
  out.bits.assign(row.size(), 0);
  if (s.front() == s.back()) {
    out.degenerate = true;
    return out;
  }

  const std::size_t n = s.size();
  std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pre[i + 1] = pre[i] + s[i];
    pre2[i + 1] = pre2[i] + s[i] * s[i];
  }
  auto sse = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const double cnt = static_cast<double>(hi - lo);
    const double sum = pre[hi] - pre[lo];
    return (pre2[hi] - pre2[lo]) - sum * sum / cnt;
  };

  double best = std::numeric_limits<double>::infinity();
  std::size_t split = 1;
  for (std::size_t k = 1; k < n; ++k) {
    if (s[k] == s[k - 1]) continue;  // equal values share a cluster
    const double cost = sse(0, k) + sse(k, n);
    if (cost < best) {
      best = cost;
      split = k;
    }
  }
  const double threshold = s[split];
  for (std::size_t i = 0; i < row.size(); ++i) out.bits[i] = row[i] >= threshold ? 1 : 0;
  return out;
}

Pooling pooling_from_string(const std::string& name) {
  if (name == "or") return Pooling::Or;
  if (name == "concat") return Pooling::Concat;
  throw Error(ErrorCode::ConfigError, "unknown pooling '" + name + "' (expected or|concat)");
}

std::string to_string(Pooling pooling) { return pooling == Pooling::Or ? "or" : "concat"; }

SpikeTrain pool_modules(const std::vector<BitTrain>& trains, Pooling mode) {
  SpikeTrain out;
  out.source_modules = static_cast<int>(trains.size());
  if (trains.empty()) return out;
  if (mode == Pooling::Concat) {
    for (const auto& t : trains) out.bits.insert(out.bits.end(), t.begin(), t.end());
    return out;
  }
  const auto len = trains.front().size();
  out.bits.assign(len, 0);
  for (const auto& t : trains) {
    if (t.size() != len) throw Error(ErrorCode::ShapeMismatch, "module trains differ in length");
    for (std::size_t i = 0; i < len; ++i) out.bits[i] = std::max(out.bits[i], t[i]);
  }
  return out;
}

std::vector<double> inter_spike_gaps(const BitTrain& bits) {
  std::vector<double> gaps;
  bool seen_spike = false;
  double run = 0.0;
  for (auto b : bits) {
    if (b) {
      if (seen_spike) gaps.push_back(run);
      seen_spike = true;
      run = 0.0;
    } else {
      run += 1.0;
    }
  }
  return gaps;
}

double spike_timing_variability(const SpikeTrain& train) {
  const auto gaps = inter_spike_gaps(train.bits);
  if (gaps.size() < 2) return 0.0;
  return population_std(gaps);
}

double spike_variability_feature(const Matrix& c, Pooling mode) {
  std::vector<BitTrain> trains;
  trains.reserve(static_cast<std::size_t>(c.rows()));
  std::vector<double> row(static_cast<std::size_t>(c.cols()));
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) row[static_cast<std::size_t>(j)] = c(k, j);
    trains.push_back(binarize_module(row).bits);
  }
  return spike_timing_variability(pool_modules(trains, mode));
}

}  // namespace mfatigue
