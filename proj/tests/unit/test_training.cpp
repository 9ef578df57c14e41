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

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/training.hpp"

using namespace mfatigue;

namespace {

constexpr Eigen::Index kDim = 6;

// Session whose exercise vectors drift slowly and whose (W, I) rise with time.
PreparedSession toy_session(int n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PreparedSession s;
  for (int k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) / (n - 1);
    s.t_s.push_back(4.0 * (k + 1));
    s.w.push_back(-1.0 + 2.0 * tau + 0.2 * g(rng));
    s.i.push_back(-1.0 + 2.0 * tau + 0.2 * g(rng));
    Vector x(kDim);
    for (Eigen::Index d = 0; d < kDim; ++d) x(d) = 0.4 * g(rng) / std::sqrt(static_cast<double>(kDim));
    x(0) += 0.5 * tau;
    s.x.push_back(x);
  }
  return s;
}

TrainableParams toy_params() {
  auto p = TrainableParams::defaults(kDim);
  p.d_diag.setConstant(0.5);
  return p;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.batch_size = 30;
  cfg.max_epochs = 12;
  return cfg;
}

EstimatorConfig small_buffer() {
  EstimatorConfig est;
  est.buffer_size = 10;
  return est;
}

}  // namespace

TEST_CASE("pair loss examples") {
  CHECK(pair_loss(1.0, 1.0, 5, 2, 0.1) == 0.0);
  CHECK(pair_loss(0.7, 0.4, 4, 1, 0.1) == doctest::Approx(0.09 + 0.36));
  CHECK(pair_loss(0.9, 0.5, 1, 0, 0.1) == doctest::Approx(0.34).epsilon(1e-12));
  try {
    pair_loss(0.5, 0.5, 2, 2, 0.1);
    FAIL("expected InvalidPair");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidPair);
  }
}

TEST_CASE("pair loss properties") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> f(1e-6, 1.0 - 1e-6);
  std::uniform_int_distribution<int> gap(1, 20);
  for (int trial = 0; trial < 2000; ++trial) {
    const double f1 = f(rng), f2 = f(rng), delta = 0.01 + 0.1 * f(rng);
    const int p2 = gap(rng), p1 = p2 + gap(rng);
    const double loss = pair_loss(f1, f2, p1, p2, delta);
    CHECK(loss > 0.0);
    const double quad = (1 - f1) * (1 - f1) + (1 - f2) * (1 - f2);
    const double diff = f1 - f2;
    if (diff >= 0.0 && diff <= 2.0 * (p1 - p2) * delta) CHECK(loss == doctest::Approx(quad).epsilon(1e-12));
  }
  CHECK(default_loss_delta(11) == doctest::Approx(0.1));
}

TEST_CASE("pair sampling") {
  const auto only = sample_pairs(2, 100, 1);
  REQUIRE(only.pairs.size() == 1);
  CHECK(only.pairs[0] == std::pair<int, int>{1, 0});

  const auto all = sample_pairs(6, 100, 2);
  CHECK(all.pairs.size() == 15);
  CHECK(std::set<std::pair<int, int>>(all.pairs.begin(), all.pairs.end()).size() == 15);

  const auto a = sample_pairs(300, 100, 9);
  const auto b = sample_pairs(300, 100, 9);
  CHECK(a.pairs == b.pairs);
  CHECK(a.pairs.size() == 100);
  CHECK(std::set<std::pair<int, int>>(a.pairs.begin(), a.pairs.end()).size() == 100);
  for (const auto& [p1, p2] : a.pairs) {
    CHECK(p1 > p2);
    CHECK(p2 >= 0);
    CHECK(p1 < 300);
  }
  try {
    sample_pairs(1, 10, 1);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooShort);
  }
}

TEST_CASE("finite-difference harness on a quadratic") {
  const Vector theta = Vector::LinSpaced(9, -2.0, 3.0);
  const Vector g = fd_gradient([](const Vector& t) { return t.squaredNorm(); }, theta, 1e-4);
  CHECK(((g - 2.0 * theta).norm() / (2.0 * theta).norm()) < 1e-8);
  const Vector gp = fd_gradient([](const Vector& t) { return t.squaredNorm(); }, theta, 1e-4, 3);
  CHECK(gp == g);
}

TEST_CASE("gradient is flat along a kernel entry that every x shares") {
  auto s = toy_session(30, 3);
  for (auto& x : s.x) x(kDim - 1) = 0.7;
  const BatchTerm term{&s, sample_pairs(30, 40, 5), default_loss_delta(30), 11};
  const auto g = loss_gradient(toy_params(), {term}, 1e-4, small_buffer());
  REQUIRE(g.size() == 2 * kDim);
  CHECK(std::abs(g(2 * kDim - 1)) < 1e-8);
}

TEST_CASE("gradients agree across step sizes on 10 batches") {
  const auto s = toy_session(40, 8);
  for (std::uint64_t b = 0; b < 10; ++b) {
    const BatchTerm term{&s, sample_pairs(40, 100, 100 + b), default_loss_delta(40), 200 + b};
    const auto g4 = loss_gradient(toy_params(), {term}, 1e-4, small_buffer());
    const auto g5 = loss_gradient(toy_params(), {term}, 1e-5, small_buffer());
    CHECK((g4 - g5).norm() / std::max(g4.norm(), 1e-12) < 1e-3);
  }
}

TEST_CASE("parameter packing") {
  auto p = toy_params();
  p.beta.setLinSpaced(-1.0, 1.0);
  p.sigma_n2 = 1.7;
  const Vector theta = pack_params(p, true);
  CHECK(theta.size() == 2 * kDim + 1);
  const auto q = unpack_params(theta, kDim, 1.0, true);
  CHECK(q.beta == p.beta);
  CHECK(q.d_diag == p.d_diag);
  CHECK(q.sigma_n2 == 1.7);
  CHECK(unpack_params(pack_params(p, false), kDim, 1.7, false).sigma_n2 == 1.7);
}

TEST_CASE("Adam steps") {
  TrainConfig cfg;
  SUBCASE("zero gradient leaves parameters unchanged") {
    auto p = toy_params();
    const auto before = p;
    AdamState st;
    adam_step(p, Vector::Zero(2 * kDim), st, cfg);
    CHECK(p.beta == before.beta);
    CHECK(p.d_diag == before.d_diag);
  }
  SUBCASE("constant gradient steps stay within the learning rate") {
    auto p = toy_params();
    AdamState st;
    Vector g = Vector::LinSpaced(2 * kDim, -3.0, 2.0);
    for (int step = 0; step < 200; ++step) {
      p.d_diag.setConstant(5.0);  // keep the projection inactive
      const Vector start = pack_params(p, false);
      adam_step(p, g, st, cfg);
      const Vector delta = pack_params(p, false) - start;
      CHECK(delta.cwiseAbs().maxCoeff() <= cfg.lr * (1.0 + 1e-6));
    }
  }
  SUBCASE("negative kernel entries are projected to zero") {
    auto p = toy_params();
    p.d_diag.setConstant(0.01);
    AdamState st;
    Vector g = Vector::Zero(2 * kDim);
    g.tail(kDim).setConstant(1.0);
    adam_step(p, g, st, cfg);
    CHECK(p.d_diag.minCoeff() == 0.0);
  }
  SUBCASE("sigma is untouched unless trained") {
    auto p = toy_params();
    p.sigma_n2 = 1.3;
    AdamState st;
    adam_step(p, Vector::Ones(2 * kDim), st, cfg);
    CHECK(p.sigma_n2 == 1.3);
  }
}

TEST_CASE("a small Adam step rarely increases a frozen batch loss") {
  const auto s = toy_session(40, 12);
  const auto est = small_buffer();
  TrainConfig cfg;
  cfg.lr = 0.001;
  int non_increasing = 0;
  const int batches = 20;
  for (int b = 0; b < batches; ++b) {
    const BatchTerm term{&s, sample_pairs(40, 100, 300 + b), default_loss_delta(40),
                         static_cast<std::uint64_t>(400 + b)};
    auto p = toy_params();
    const double before = term_loss(p, term, est);
    AdamState st;
    adam_step(p, loss_gradient(p, {term}, 1e-4, est), st, cfg);
    non_increasing += term_loss(p, term, est) <= before;
  }
  CHECK(non_increasing >= 0.9 * batches);
}

TEST_CASE("dataset splitting") {
  const auto s = split_dataset(10, {0.7, 0.1, 0.2}, 3);
  CHECK(s.train.size() == 7);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 2);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 10);
  const auto again = split_dataset(10, {0.7, 0.1, 0.2}, 3);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  auto code = [](std::size_t n) {
    try {
      split_dataset(n, {0.7, 0.1, 0.2}, 1);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code(3) == ErrorCode::NotEnoughForSplit);
  CHECK(code(0) == ErrorCode::EmptyDataset);
  CHECK_THROWS_AS(split_dataset(10, {0.5, 0.1, 0.2}, 1), Error);
}

TEST_CASE("segment mode cuts sessions into contiguous pieces") {
  const auto segs = segment_sessions({toy_session(30, 1)}, 10);
  CHECK(segs.size() == 10);
  for (const auto& s : segs) CHECK(s.size() == 3);
  CHECK(segs[1].t_s.front() == doctest::Approx(16.0));
  CHECK_NOTHROW(split_dataset(segs.size(), {0.7, 0.1, 0.2}, 1));
}

TEST_CASE("training on four sessions") {
  std::vector<PreparedSession> sessions;
  for (std::uint32_t k = 0; k < 4; ++k) sessions.push_back(toy_session(30, 50 + k));
  const DatasetSplit split{{0, 1}, {2}, {3}};
  const auto cfg = quick_config();
  const auto r1 = train(sessions, split, cfg, small_buffer(), 7, toy_params());
  REQUIRE_FALSE(r1.log.epochs.empty());
  CHECK(r1.log.epochs.size() <= static_cast<std::size_t>(cfg.max_epochs));
  for (std::size_t k = 1; k < r1.log.epochs.size(); ++k) {
    CHECK(r1.log.epochs[k].best_val_loss <= r1.log.epochs[k - 1].best_val_loss);
  }
  for (const auto& e : r1.log.epochs) {
    CHECK(e.lr == 0.1);
    CHECK(e.batch_size == 30);
  }
  CHECK((r1.log.stop_reason == "plateau" || r1.log.stop_reason == "max_epochs" ||
         r1.log.stop_reason == "early_stop"));
  CHECK(r1.params.d_diag.minCoeff() >= 0.0);

  const auto r2 = train(sessions, split, cfg, small_buffer(), 7, toy_params());
  REQUIRE(r2.log.epochs.size() == r1.log.epochs.size());
  for (std::size_t k = 0; k < r1.log.epochs.size(); ++k) {
    CHECK(r2.log.epochs[k].train_loss == r1.log.epochs[k].train_loss);
    CHECK(r2.log.epochs[k].val_loss == r1.log.epochs[k].val_loss);
  }
  CHECK(r2.params.beta == r1.params.beta);
  CHECK(r2.log.stop_reason == r1.log.stop_reason);
}

TEST_CASE("training from parameters that already give F near 1 stops on a plateau") {
  std::vector<PreparedSession> sessions;
  for (std::uint32_t k = 0; k < 4; ++k) {
    auto s = toy_session(20, 70 + k);
    for (auto& x : s.x) x(0) = 1.0;
    sessions.push_back(s);
  }
  auto p = toy_params();
  p.beta(0) = -200.0;
  const auto r = train(sessions, {{0, 1}, {2}, {3}}, quick_config(), small_buffer(), 3, p);
  CHECK(r.log.stop_reason == "plateau");
  CHECK(r.log.epochs.back().train_loss < 1e-6);
}

TEST_CASE("restart averaging") {
  const auto s = toy_session(40, 21);
  const auto p = toy_params();
  const auto est = small_buffer();
  const auto one = evaluate_with_restarts(p, s, 1, 99, est);
  const auto direct = run_prepared(s, p, 99, est);
  CHECK(one.mean.values() == direct.values());
  const auto many = evaluate_with_restarts(p, s, 100, 1, est);
  const auto other = evaluate_with_restarts(p, s, 100, 2, est);
  CHECK(many.spread.size() == s.size());
  for (double v : many.spread) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  CHECK(pearson(many.mean.values(), other.mean.values()).value >= 0.99);
}
