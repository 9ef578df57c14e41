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

#include "mfatigue/synergy.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"

namespace mfatigue {

namespace {

constexpr double kDenomFloor = 1e-16;

Matrix random_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double v = u(rng);
      while (v <= 0.0) v = u(rng);
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace

double variance_accounted_for(const Matrix& m, const Matrix& v, const Matrix& c) {
  const double total = m.squaredNorm();
  if (total <= 0.0) return 0.0;
  return 1.0 - (m - v * c).squaredNorm() / total;
}

void normalize_columns(Matrix& v, Matrix& c) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    const double norm = v.col(k).norm();
    if (norm <= 0.0) continue;
    v.col(k) /= norm;
    c.row(k) *= norm;
  }
}

SynergyDecomposition nmf(const Matrix& m, int n, std::uint64_t seed, const NmfOptions& opts) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "synergy count must be >= 1");
  if (n > m.rows()) throw Error(ErrorCode::RankTooHigh, "synergy count exceeds muscle count");
  if ((m.array() < 0).any() || !m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "NMF input must be finite and non-negative");
  }
  const double total = m.squaredNorm();
  if (total <= 0.0) throw Error(ErrorCode::DegenerateInput, "NMF input is all zero");

  std::mt19937_64 rng(seed);
  Matrix v = random_uniform(m.rows(), n, rng);
  Matrix c = random_uniform(n, m.cols(), rng);
  // Start at a sensible scale: match the mean of M.
  const double scale = std::sqrt(m.mean() / std::max((v * c).mean(), kDenomFloor));
  v *= scale;
  c *= scale;

  SynergyDecomposition out;
  double prev = (m - v * c).squaredNorm();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const Matrix vtm = v.transpose() * m;
    const Matrix vtv = v.transpose() * v;
    c.array() *= vtm.array() / (vtv * c).array().max(kDenomFloor);
    const Matrix mct = m * c.transpose();
    const Matrix cct = c * c.transpose();
    v.array() *= mct.array() / (v * cct).array().max(kDenomFloor);

    const double err = (m - v * c).squaredNorm();
    if (opts.record_objective) out.objective.push_back(err);
    const double rel = (prev - err) / std::max(prev, kDenomFloor);
    prev = err;
    if (rel >= 0.0 && rel < opts.tol) {
      ++it;
      break;
    }
  }

  normalize_columns(v, c);
  out.vaf = 1.0 - prev / total;
  out.v = std::move(v);
  out.c = std::move(c);
  out.n = n;
  out.iterations = it;
  return out;
}

SynergyDecomposition nmf_best(const Matrix& m, int n, std::uint64_t seed, int restarts,
                              const NmfOptions& opts) {
  SynergyDecomposition best;
  best.vaf = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    auto cand = nmf(m, n, derive_seed(seed, {static_cast<std::uint64_t>(r)}), opts);
    if (cand.vaf > best.vaf) best = std::move(cand);
  }
  return best;
}

SynergyCount select_synergy_count(const Matrix& m0, std::uint64_t seed, double vaf_threshold,
                                  int restarts, const NmfOptions& opts) {
  const int max_n = static_cast<int>(m0.rows());
  for (int n = 1; n <= max_n; ++n) {
    const auto dec = nmf_best(m0, n, derive_seed(seed, {static_cast<std::uint64_t>(n)}), restarts, opts);
    if (dec.vaf >= vaf_threshold) return {n, true};
  }
  return {max_n, false};
}

Matrix fractionation(const Matrix& v0, const Matrix& vt) {
  if (v0.rows() != vt.rows() || v0.cols() != vt.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "synergy matrices differ in shape");
  }
  return v0.transpose() * vt;
}

double compensation_feature(const Matrix& frac) noexcept { return frac.norm(); }

}  // namespace mfatigue
