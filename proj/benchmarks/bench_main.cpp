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


#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mfatigue/estimator.hpp"
#include "mfatigue/preprocess.hpp"
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

// One 4 s window of 9 muscles at the decimated 100 Hz rate.
void BM_Nmf(benchmark::State& state) {
  const Matrix m = random_nonneg(9, 4, 1) * random_nonneg(4, 400, 2);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nmf(m, n, 3).vaf);
}
BENCHMARK(BM_Nmf)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_LaplaceUpdate(benchmark::State& state) {
  const int buffer = static_cast<int>(state.range(0));
  const auto p = TrainableParams::defaults(kExerciseDim);
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<Vector> xs(256, Vector(kExerciseDim));
  for (auto& x : xs)
    for (Eigen::Index d = 0; d < x.size(); ++d) x(d) = g(rng);
  auto st = init_state(9, buffer);
  std::size_t k = 0;
  for (auto _ : state) {
    const auto r = laplace_update(st, xs[k % xs.size()], 0.3, -0.2, p);
    benchmark::DoNotOptimize(r.posterior.mu);
    if (++k % xs.size() == 0) st = init_state(9, buffer);
  }
}
BENCHMARK(BM_LaplaceUpdate)->Arg(10)->Arg(50);

// Five minutes of one EMG channel through the 20-500 Hz band-pass.
void BM_FiltFilt(benchmark::State& state) {
  const double fs = kDefaultEmgRate;
  const auto n = static_cast<Eigen::Index>(300.0 * fs);
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = g(rng);
  const auto filt = SosFilter::butterworth(FilterSpec::bandpass(6, 20.0, 500.0), fs);
  for (auto _ : state) benchmark::DoNotOptimize(filt.apply_zero_phase(x).sum());
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FiltFilt)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
