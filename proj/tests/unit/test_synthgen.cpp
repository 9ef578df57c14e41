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
#include <set>

#include "mfatigue/error.hpp"
#include "mfatigue/features.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/preprocess.hpp"
#include "mfatigue/synergy.hpp"
#include "mfatigue/synthgen.hpp"
#include "test_support.hpp"

using namespace mfatigue;

namespace {

SynthConfig only_gains(double frac, double jitter, double drift) {
  auto cfg = SynthConfig::fast_profile();
  cfg.fractionation_gain = frac;
  cfg.jitter_gain = jitter;
  cfg.drift_gain = drift;
  return cfg;
}

std::vector<double> column(const std::vector<FeatureSample>& f, double FeatureSample::*field) {
  std::vector<double> out;
  for (const auto& s : f) out.push_back(s.*field);
  return out;
}

std::vector<double> times(const std::vector<FeatureSample>& f) { return column(f, &FeatureSample::t_s); }

}  // namespace

TEST_CASE("ground truth curves") {
  const auto cfg = SynthConfig::fast_profile();
  std::set<FatigueShape> shapes;
  for (int subject = 0; subject < 3; ++subject) {
    const auto gt = ground_truth_curve(cfg, subject, 180.0);
    shapes.insert(gt.shape);
    REQUIRE(gt.g.size() == 181);
    CHECK(gt.g.front() == 0.0);
    CHECK(gt.g.back() <= 1.0);
    CHECK(gt.g.back() > 0.5);
    for (std::size_t k = 1; k < gt.g.size(); ++k) CHECK(gt.g[k] >= gt.g[k - 1]);
  }
  CHECK(shapes.size() == 3);
}

TEST_CASE("SF follows the ground truth in the Likert orientation") {
  const auto s = generate_session(SynthConfig::fast_profile(), 1, 0, 2);
  REQUIRE(s.sf.entries.size() >= 5);
  for (std::size_t k = 1; k < s.sf.entries.size(); ++k) {
    CHECK(s.sf.entries[k].likert <= s.sf.entries[k - 1].likert);
    CHECK(s.sf.entries[k].t_s == doctest::Approx(s.sf.entries[k - 1].t_s + 30.0));
  }
  REQUIRE(s.ground_truth.has_value());
  const auto& gt = *s.ground_truth;
  for (const auto& e : s.sf.entries) {
    const auto k = static_cast<std::size_t>(std::lround(e.t_s));
    CHECK(e.likert == 8 - static_cast<int>(std::lround(1.0 + 6.0 * gt.g[k])));
  }
}

TEST_CASE("session layout") {
  const auto cfg = SynthConfig::fast_profile();
  const auto s = generate_session(cfg, 0, 1, 2);
  CHECK(s.subject_id == "S01");
  CHECK(s.day_id == "D2");
  CHECK(s.session_index == 2);
  CHECK(s.emg.muscles() == 9);
  CHECK(s.emg.sample_rate == 250.0);
  CHECK(s.duration() == doctest::Approx(180.0).epsilon(1e-3));
  CHECK_NOTHROW(validate_session(s));
}

TEST_CASE("invalid configurations are rejected") {
  auto code = [](SynthConfig cfg) {
    try {
      generate_session(cfg, 0, 0, 0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  auto neg = SynthConfig::fast_profile();
  neg.jitter_gain = -1.0;
  CHECK(code(neg) == ErrorCode::ConfigError);
  auto unnorm = SynthConfig::fast_profile();
  unnorm.base_synergies *= 2.0;
  CHECK(code(unnorm) == ErrorCode::ConfigError);
  auto negsyn = SynthConfig::fast_profile();
  negsyn.base_synergies(0, 0) = -negsyn.base_synergies(0, 0);
  CHECK(code(negsyn) == ErrorCode::ConfigError);
  CHECK_THROWS_AS(SynthConfig::profile("huge"), Error);
}

TEST_CASE("base synergies are non-negative unit columns") {
  const Matrix v = default_base_synergies();
  CHECK(v.rows() == 9);
  CHECK(v.minCoeff() >= 0.0);
  for (Eigen::Index k = 0; k < v.cols(); ++k) CHECK(v.col(k).norm() == doctest::Approx(1.0));
  CHECK(default_synergy_phases().size() == static_cast<std::size_t>(v.cols()));
}

TEST_CASE("without fatigue every window recovers the injected synergies") {
  auto cfg = only_gains(0.0, 0.0, 0.0);
  cfg.noise_std = 0.0;
  cfg.session_minutes = 1.0;
  const auto d = generate_session_detail(cfg, 0, 0, 0);
  const Matrix act = session_activation(d.session.emg, PreprocessConfig{});
  const SynergyConfig sc;
  const auto step = nmf_decimation(d.session.emg.sample_rate, sc);
  const Eigen::Index n = cfg.base_synergies.cols();
  // Per-day electrode gains scale the rows of the spatial weights.
  Matrix truth = d.channel_gain.asDiagonal() * cfg.base_synergies;
  for (Eigen::Index k = 0; k < n; ++k) truth.col(k).normalize();
  auto best_match = [n](const Matrix& ref, const Matrix& v) {
    const Matrix cos = ref.transpose() * v;
    double total = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) total += cos.row(k).maxCoeff();
    return total / static_cast<double>(n);
  };
  // The injected envelopes factor into V_base exactly. After per-channel
  // percentile normalization the pipeline's synergies differ from V_base by
  // a row scaling, so there the check is stationarity against window 0.
  double injected = 0.0, stationary = 0.0;
  Matrix v0;
  const auto spans = window_stream(d.session, 4.0, 4.0);
  for (const auto& span : spans) {
    injected += best_match(truth, nmf_best(window_activation(d.activation, span, step), static_cast<int>(n), 5, 3).v);
    const auto dec = nmf_best(window_activation(act, span, step), static_cast<int>(n), 5, 3);
    if (v0.size() == 0) v0 = dec.v;
    stationary += best_match(v0, dec.v);
  }
  CHECK(injected / static_cast<double>(spans.size()) >= 0.99);
  CHECK(stationary / static_cast<double>(spans.size()) >= 0.99);
}

TEST_CASE("the activation pipeline reproduces the injected envelope") {
  auto cfg = only_gains(1.0, 1.0, 1.0);
  cfg.noise_std = 0.0;
  cfg.session_minutes = 1.0;
  const auto d = generate_session_detail(cfg, 0, 0, 0);
  const Matrix act = session_activation(d.session.emg, PreprocessConfig{});
  REQUIRE(act.cols() == d.activation.cols());
  for (Eigen::Index m = 0; m < act.rows(); ++m) {
    std::vector<double> a(static_cast<std::size_t>(act.cols())), b(a.size());
    for (Eigen::Index k = 0; k < act.cols(); ++k) {
      a[static_cast<std::size_t>(k)] = act(m, k);
      b[static_cast<std::size_t>(k)] = d.activation(m, k);
    }
    CHECK(pearson(a, b).value >= 0.9);
  }
}

TEST_CASE("fractionation drives the compensation feature") {
  // Mean over four subjects, one per fatigue shape plus a repeat.
  double rho = 0.0;
  for (int subject = 0; subject < 4; ++subject) {
    const auto f = extract_features(generate_session(only_gains(1.0, 0.0, 0.0), subject, 0, 0), FeatureConfig{}, 11);
    rho += std::abs(spearman(times(f), column(f, &FeatureSample::w)).value);
  }
  CHECK(rho / 4.0 > 0.6);
}

TEST_CASE("jitter drives the spike-timing variability") {
  double rho = 0.0;
  for (int subject = 0; subject < 4; ++subject) {
    const auto f = extract_features(generate_session(only_gains(0.0, 1.0, 0.0), subject, 0, 0), FeatureConfig{}, 11);
    rho += spearman(times(f), column(f, &FeatureSample::i)).value;
  }
  CHECK(rho / 4.0 > 0.6);
}

TEST_CASE("generation is deterministic") {
  test::TempDir a, b;
  const auto cfg = test::tiny_profile();
  save_session(generate_session(cfg, 0, 0, 0), a.path());
  save_session(generate_session(cfg, 0, 0, 0), b.path());
  for (const char* name : {"emg.csv", "imu.csv", "foot.csv", "sf.csv", "meta.json", "ground_truth.csv"}) {
    CHECK(test::read_text(a / name) == test::read_text(b / name));
  }
  const auto other = generate_session(cfg, 0, 0, 1);
  const auto first = generate_session(cfg, 0, 0, 0);
  CHECK(other.emg.channels != first.emg.channels);
}

TEST_CASE("study tree and day sharing") {
  test::TempDir dir;
  auto cfg = test::tiny_profile();
  cfg.n_subjects = 2;
  cfg.n_days = 2;
  cfg.sessions_per_day = 3;
  cfg.session_minutes = 0.5;
  const auto entries = generate_study(cfg, dir.path());
  CHECK(entries.size() == 12);
  std::set<std::filesystem::path> dirs;
  for (const auto& e : entries) {
    dirs.insert(e.dir);
    CHECK(std::filesystem::exists(e.dir / "meta.json"));
    CHECK_NOTHROW(load_session(e.dir));
  }
  CHECK(dirs.size() == 12);
  CHECK(session_relative_dir(0, 1, 2) == std::filesystem::path("S01") / "D2" / "session2");

  const auto d1 = generate_session_detail(cfg, 1, 0, 0);
  const auto d2 = generate_session_detail(cfg, 1, 1, 0);
  CHECK(d1.session.ground_truth->g == d2.session.ground_truth->g);
  CHECK(d1.channel_gain != d2.channel_gain);
  CHECK(d1.session.emg.channels != d2.session.emg.channels);
  CHECK(d1.channel_gain.minCoeff() >= 0.8);
  CHECK(d1.channel_gain.maxCoeff() <= 1.2);
}
