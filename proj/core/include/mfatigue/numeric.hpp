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

// Small numerical helpers shared across modules: the standard normal
// distribution in log space, descriptive statistics and seed derivation.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace mfatigue {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double v) noexcept;

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// log Phi(z). Uses an asymptotic series below z = -8 so that the result
/// stays finite far into the lower tail.
double log_normal_cdf(double z) noexcept;

/// phi(z) / Phi(z), the inverse Mills ratio, computed without underflow.
double inverse_mills(double z) noexcept;

double mean(std::span<const double> v) noexcept;
/// Population (divide by N) standard deviation.
double population_std(std::span<const double> v) noexcept;

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // constant input; value reported as 0
};

Correlation pearson(std::span<const double> a, std::span<const double> b);
Correlation spearman(std::span<const double> a, std::span<const double> b);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> ranks(std::span<const double> v);

/// Linear-interpolated percentile, p in [0, 100].
double percentile(std::span<const double> v, double p);

/// Mixes a base seed with identifiers into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) noexcept;

}  // namespace mfatigue
