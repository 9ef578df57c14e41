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
#include <vector>

#include "mfatigue/datamodel.hpp"

namespace mfatigue {

/// M ~= V * C with V (muscles x n) and C (n x samples) non-negative.
/// Columns of V have unit L2 norm; their scale lives in the rows of C.
struct SynergyDecomposition {
  Matrix v;
  Matrix c;
  double vaf = 0.0;  // 1 - |M - VC|^2 / |M|^2
  int n = 0;
  int iterations = 0;
  std::vector<double> objective;  // squared residual after each iteration
};

struct NmfOptions {
  double tol = 1e-6;
  int max_iter = 500;
  bool record_objective = false;
};

/// Multiplicative-update NMF on the Frobenius objective, initialized with
/// U(0,1) entries from `seed`. Stops when the relative decrease of the
/// residual falls below `tol`.
SynergyDecomposition nmf(const Matrix& m, int n, std::uint64_t seed, const NmfOptions& opts = {});

/// Best of `restarts` runs by VAF, seeds derived from `seed`.
SynergyDecomposition nmf_best(const Matrix& m, int n, std::uint64_t seed, int restarts,
                              const NmfOptions& opts = {});

/// Rescales V columns to unit norm, folding the norm into C. Zero columns
/// are left untouched.
void normalize_columns(Matrix& v, Matrix& c);

double variance_accounted_for(const Matrix& m, const Matrix& v, const Matrix& c);

struct SynergyCount {
  int n = 1;
  bool threshold_reached = true;  // false: returned m without reaching it
};

SynergyCount select_synergy_count(const Matrix& m0, std::uint64_t seed, double vaf_threshold = 0.90,
                                  int restarts = 10, const NmfOptions& opts = {});

/// frac(i, k) = dot(V0 column i, Vt column k); both inputs column-normalized.
Matrix fractionation(const Matrix& v0, const Matrix& vt);

/// Frobenius norm of the fractionation matrix.
double compensation_feature(const Matrix& frac) noexcept;

}  // namespace mfatigue
