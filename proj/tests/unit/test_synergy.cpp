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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "mfatigue/error.hpp"
#include "mfatigue/synergy.hpp"

using namespace mfatigue;

namespace {

Matrix random_nonneg(Eigen::Index rows, Eigen::Index cols, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

Matrix low_rank(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank, std::uint32_t seed) {
  return random_nonneg(rows, rank, seed) * random_nonneg(rank, cols, seed + 1);
}

// Rank-2 matrix whose synergies act on disjoint muscles in alternating bursts.
Matrix disjoint_rank2(Eigen::Index cols) {
  Matrix v = Matrix::Zero(9, 2);
  v.col(0).head(4) << 1.0, 0.8, 0.6, 0.4;
  v.col(1).tail(5) << 0.3, 0.5, 0.7, 0.9, 1.0;
  Matrix c = Matrix::Zero(2, cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double phase = std::sin(0.1 * static_cast<double>(k));
    c(0, k) = std::max(0.0, phase);
    c(1, k) = std::max(0.0, -phase);
  }
  return v * c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("rank-3 construct and recover") {
  const Matrix m = low_rank(9, 400, 3, 11);
  NmfOptions opts;
  opts.max_iter = 5000;
  opts.tol = 1e-10;
  opts.record_objective = true;
  const auto d = nmf_best(m, 3, 5, 3, opts);
  CHECK(d.vaf >= 0.999);
  CHECK(d.n == 3);
}

TEST_CASE("NMF objective never increases") {
  const Matrix m = low_rank(9, 200, 3, 3) + 0.05 * random_nonneg(9, 200, 99);
  NmfOptions opts;
  opts.record_objective = true;
  opts.tol = 0.0;
  opts.max_iter = 300;
  const auto d = nmf(m, 3, 17, opts);
  REQUIRE(d.objective.size() >= 10);
  for (std::size_t k = 1; k < d.objective.size(); ++k) {
    CHECK(d.objective[k] <= d.objective[k - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("decomposition invariants") {
  const Matrix m = low_rank(9, 150, 4, 21);
  const auto d = nmf(m, 4, 3);
  CHECK(d.v.minCoeff() >= 0.0);
  CHECK(d.c.minCoeff() >= 0.0);
  for (Eigen::Index k = 0; k < d.v.cols(); ++k) CHECK(d.v.col(k).norm() == doctest::Approx(1.0));
  const double vaf = 1.0 - (m - d.v * d.c).squaredNorm() / m.squaredNorm();
  CHECK(d.vaf == doctest::Approx(vaf).epsilon(1e-12));
  CHECK(variance_accounted_for(m, d.v, d.c) == doctest::Approx(vaf).epsilon(1e-12));
}

TEST_CASE("rank-1 recovery finds the spatial vector") {
  const Vector v = (Vector(5) << 1.0, 2.0, 0.5, 0.0, 3.0).finished();
  const Vector c = random_nonneg(1, 80, 7).row(0).transpose();
  const auto d = nmf(v * c.transpose(), 1, 2);
  CHECK(d.v.col(0).dot(v.normalized()) >= 0.999);
}

TEST_CASE("VAF does not decrease from n = m - 1 to n = m") {
  const Matrix m = random_nonneg(5, 120, 31);
  const auto lower = nmf_best(m, 4, 9, 3);
  const auto full = nmf_best(m, 5, 9, 3);
  CHECK(full.vaf >= lower.vaf);
}

TEST_CASE("NMF is seeded deterministically") {
  const Matrix m = random_nonneg(6, 90, 5);
  const auto a = nmf(m, 2, 1234);
  const auto b = nmf(m, 2, 1234);
  CHECK(a.v == b.v);
  CHECK(a.c == b.c);
}

TEST_CASE("NMF input errors") {
  CHECK(code_of([] { nmf(Matrix::Zero(4, 10), 2, 1); }) == ErrorCode::DegenerateInput);
  CHECK(code_of([] { nmf(Matrix::Ones(4, 10), 5, 1); }) == ErrorCode::RankTooHigh);
}

TEST_CASE("column normalization preserves the product") {
  Matrix v = random_nonneg(6, 3, 8);
  v.col(1).setZero();
  Matrix c = random_nonneg(3, 40, 9);
  const Matrix before = v * c;
  normalize_columns(v, c);
  CHECK((v * c - before).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(v.col(0).norm() == doctest::Approx(1.0));
  CHECK(v.col(1).norm() == 0.0);
}

TEST_CASE("synergy count selection") {
  SUBCASE("exact rank 2") {
    const auto n = select_synergy_count(disjoint_rank2(300), 3, 0.90, 5);
    CHECK(n.n == 2);
    CHECK(n.threshold_reached);
  }
  SUBCASE("rank 1") {
    const auto n = select_synergy_count(low_rank(9, 200, 1, 43), 3, 0.90, 5);
    CHECK(n.n == 1);
  }
  SUBCASE("white noise at a strict threshold needs almost every muscle") {
    const auto n = select_synergy_count(random_nonneg(9, 300, 45), 3, 0.999, 3);
    CHECK(n.n >= 8);
  }
  SUBCASE("unreachable threshold returns m with a flag") {
    const auto n = select_synergy_count(random_nonneg(4, 100, 47), 3, 1.0 + 1e-9, 2);
    CHECK(n.n == 4);
    CHECK_FALSE(n.threshold_reached);
  }
}

TEST_CASE("fractionation examples") {
  const Matrix eye = Matrix::Identity(4, 3);
  CHECK(fractionation(eye, eye).isApprox(Matrix::Identity(3, 3)));

  Matrix perm(4, 3);
  perm << eye.col(2), eye.col(0), eye.col(1);
  const Matrix p = fractionation(eye, perm);
  CHECK((p.colwise().sum().array() == 1.0).all());
  CHECK((p.rowwise().sum().array() == 1.0).all());
  CHECK(p(2, 0) == 1.0);

  Matrix v0 = Matrix::Zero(3, 1);
  v0(0, 0) = 1.0;
  Matrix vt = Matrix::Zero(3, 1);
  vt(0, 0) = vt(1, 0) = 1.0 / std::sqrt(2.0);
  CHECK(fractionation(v0, vt)(0, 0) == doctest::Approx(0.7071).epsilon(1e-4));

  CHECK(code_of([] { fractionation(Matrix::Identity(4, 2), Matrix::Identity(3, 2)); }) ==
        ErrorCode::ShapeMismatch);
  CHECK(code_of([] { fractionation(Matrix::Identity(4, 2), Matrix::Identity(4, 3)); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("fractionation of normalized non-negative synergies") {
  Matrix v = random_nonneg(9, 4, 51);
  Matrix w = random_nonneg(9, 4, 52);
  Matrix c = Matrix::Ones(4, 1);
  normalize_columns(v, c);
  c = Matrix::Ones(4, 1);
  normalize_columns(w, c);
  const Matrix self = fractionation(v, v);
  for (int k = 0; k < 4; ++k) CHECK(self(k, k) == doctest::Approx(1.0));
  const Matrix f = fractionation(v, w);
  CHECK(f.minCoeff() >= 0.0);
  CHECK(f.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("compensation feature examples") {
  CHECK(compensation_feature(Matrix::Identity(3, 3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(compensation_feature(Matrix::Zero(3, 3)) == 0.0);
  Matrix f(2, 2);
  f << 1.0, 0.5, 0.5, 1.0;
  CHECK(compensation_feature(f) == doctest::Approx(1.5811).epsilon(1e-4));
}

TEST_CASE("compensation feature ignores a shared column permutation") {
  Matrix v0 = random_nonneg(9, 3, 61);
  Matrix vt = random_nonneg(9, 3, 62);
  Matrix c = Matrix::Ones(3, 1);
  normalize_columns(v0, c);
  normalize_columns(vt, c);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  const double w = compensation_feature(fractionation(v0, vt));
  const double wp = compensation_feature(fractionation(v0 * perm, vt * perm));
  CHECK(wp == doctest::Approx(w).epsilon(1e-12));
}
