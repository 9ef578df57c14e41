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
#include <limits>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/error.hpp"
#include "mfatigue/synthgen.hpp"
#include "test_support.hpp"

using namespace mfatigue;
using mfatigue::test::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mfatigue::Error");
  return ErrorCode::InvalidArgument;
}

SessionData tiny_session() { return generate_session(test::tiny_profile(), 0, 0, 0); }

}  // namespace

TEST_CASE("session round trip keeps every sample") {
  TempDir dir;
  const auto s = tiny_session();
  save_session(s, dir.path());
  const auto r = load_session(dir.path());
  CHECK(r.subject_id == s.subject_id);
  CHECK(r.day_id == s.day_id);
  CHECK(r.session_index == s.session_index);
  CHECK(r.emg.muscles() == 9);
  CHECK(r.emg.muscle_names == default_muscle_names());
  CHECK(r.emg.sample_rate == doctest::Approx(s.emg.sample_rate).epsilon(1e-12));
  CHECK((r.emg.channels - s.emg.channels).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.imu.shank - s.imu.shank).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.imu.thigh - s.imu.thigh).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.foot.heel - s.foot.heel).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(r.sf.entries.size() == s.sf.entries.size());
  for (std::size_t k = 0; k < r.sf.entries.size(); ++k) {
    CHECK(r.sf.entries[k].likert == s.sf.entries[k].likert);
    CHECK(std::abs(r.sf.entries[k].t_s - s.sf.entries[k].t_s) < 1e-12);
  }
  REQUIRE(r.ground_truth.has_value());
  CHECK(r.ground_truth->shape == s.ground_truth->shape);
  CHECK(r.ground_truth->g.size() == s.ground_truth->g.size());
}

TEST_CASE("default-rate session loads with 9 channels at 1111.11 Hz") {
  TempDir dir;
  auto cfg = test::tiny_profile();
  cfg.emg_rate = kDefaultEmgRate;
  cfg.session_minutes = 0.25;
  save_session(generate_session(cfg, 0, 0, 0), dir.path());
  const auto r = load_session(dir.path());
  CHECK(r.emg.muscles() == 9);
  CHECK(r.emg.sample_rate == doctest::Approx(1111.11));
}

TEST_CASE("missing foot.csv is a MissingStream error") {
  TempDir dir;
  save_session(tiny_session(), dir.path());
  std::filesystem::remove(dir / "foot.csv");
  CHECK(code_of([&] { load_session(dir.path()); }) == ErrorCode::MissingStream);
}

TEST_CASE("NaN in the EMG file reports its row and column") {
  TempDir dir;
  save_session(tiny_session(), dir.path());
  auto text = test::read_text(dir / "emg.csv");
  // Data row 5 (0-based), CSV column 2 (t is column 0).
  std::size_t pos = 0;
  for (int line = 0; line < 6; ++line) pos = text.find('\n', pos) + 1;
  std::size_t c1 = text.find(',', pos);
  std::size_t c2 = text.find(',', c1 + 1);
  std::size_t c3 = text.find(',', c2 + 1);
  text.replace(c2 + 1, c3 - c2 - 1, "nan");
  test::write_text(dir / "emg.csv", text);
  try {
    load_session(dir.path());
    FAIL("expected CorruptSample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptSample);
    REQUIRE(e.row.has_value());
    REQUIRE(e.col.has_value());
    CHECK(*e.row == 5);
    CHECK(*e.col == 2);
  }
}

TEST_CASE("streams of different duration are rejected") {
  auto s = tiny_session();
  const auto keep = s.foot.samples() - 3 * static_cast<Eigen::Index>(s.foot.sample_rate);
  s.foot.heel.conservativeResize(keep);
  s.foot.metatarsal.conservativeResize(keep);
  CHECK(code_of([&] { validate_session(s); }) == ErrorCode::DurationMismatch);
}

TEST_CASE("session invariants are enforced by validation") {
  SUBCASE("one EMG channel") {
    auto s = tiny_session();
    s.emg.channels.conservativeResize(1, Eigen::NoChange);
    s.emg.muscle_names.resize(1);
    CHECK_THROWS_AS(validate_session(s), Error);
  }
  SUBCASE("two EMG channels are allowed") {
    auto s = tiny_session();
    s.emg.channels.conservativeResize(2, Eigen::NoChange);
    s.emg.muscle_names.resize(2);
    CHECK_NOTHROW(validate_session(s));
  }
  SUBCASE("non-positive rate") {
    auto s = tiny_session();
    s.imu.sample_rate = 0.0;
    CHECK_THROWS_AS(validate_session(s), Error);
  }
  SUBCASE("IMU segments of unequal length") {
    auto s = tiny_session();
    s.imu.thigh.conservativeResize(Eigen::NoChange, s.imu.thigh.cols() - 1);
    CHECK_THROWS_AS(validate_session(s), Error);
  }
  SUBCASE("negative foot pressure") {
    auto s = tiny_session();
    s.foot.heel(3) = -1.0;
    CHECK_THROWS_AS(validate_session(s), Error);
  }
  SUBCASE("infinite EMG sample") {
    auto s = tiny_session();
    s.emg.channels(0, 10) = std::numeric_limits<double>::infinity();
    CHECK(code_of([&] { validate_session(s); }) == ErrorCode::CorruptSample);
  }
  SUBCASE("Likert out of range") {
    auto s = tiny_session();
    s.sf.entries.front().likert = 8;
    CHECK_THROWS_AS(validate_session(s), Error);
  }
  SUBCASE("SF times not increasing") {
    auto s = tiny_session();
    REQUIRE(s.sf.entries.size() >= 2);
    s.sf.entries[1].t_s = s.sf.entries[0].t_s;
    CHECK_THROWS_AS(validate_session(s), Error);
  }
}

TEST_CASE("trajectory round trip") {
  TempDir dir;
  FatigueTrajectory traj;
  traj.samples = {{4.0, 0.125}, {8.0, 1.0 / 3.0}, {12.0, 0.9999999}};
  save_trajectory(traj, dir / "traj.csv");
  const auto r = load_trajectory(dir / "traj.csv");
  REQUIRE(r.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(r.samples[k].t_s - traj.samples[k].t_s) < 1e-12);
    CHECK(std::abs(r.samples[k].f - traj.samples[k].f) < 1e-12);
  }
}

TEST_CASE("empty trajectory is a header-only file") {
  TempDir dir;
  save_trajectory({}, dir / "traj.csv");
  CHECK(test::read_text(dir / "traj.csv") == "t,F\n");
  CHECK(load_trajectory(dir / "traj.csv").empty());
}

TEST_CASE("non-monotone trajectory timestamps are a ParseError with the line") {
  TempDir dir;
  test::write_text(dir / "traj.csv", "t,F\n4,0.5\n8,0.6\n6,0.7\n");
  try {
    load_trajectory(dir / "traj.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    REQUIRE(e.line.has_value());
    CHECK(*e.line == 4);
  }
}

TEST_CASE("trajectory values must lie in the open unit interval") {
  FatigueTrajectory traj;
  traj.samples = {{1.0, 0.5}, {2.0, 1.0}};
  CHECK_THROWS_AS(validate_trajectory(traj), Error);
  traj.samples = {{1.0, 0.5}, {2.0, 0.6}};
  CHECK_NOTHROW(validate_trajectory(traj));
}

TEST_CASE("features and ground truth round trip") {
  TempDir dir;
  std::vector<FeatureSample> feats(3);
  for (int k = 0; k < 3; ++k) {
    feats[k].t_s = 4.0 * (k + 1);
    feats[k].w = 1.0 / (k + 3);
    feats[k].i = std::sqrt(2.0) * k;
    feats[k].x = Vector::LinSpaced(kExerciseDim, -1.0 / 7.0, k + 0.1);
  }
  save_features(feats, dir / "features.csv");
  const auto r = load_features(dir / "features.csv");
  REQUIRE(r.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(r[k].w - feats[k].w) < 1e-12);
    CHECK(std::abs(r[k].i - feats[k].i) < 1e-12);
    CHECK((r[k].x - feats[k].x).cwiseAbs().maxCoeff() < 1e-12);
  }

  GroundTruthFatigue gt;
  gt.t_s = {0.0, 1.0, 2.0};
  gt.g = {0.0, 0.1 / 3.0, 0.7};
  save_ground_truth(gt, dir / "gt.csv");
  const auto g2 = load_ground_truth(dir / "gt.csv");
  REQUIRE(g2.g.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(g2.g[k] - gt.g[k]) < 1e-12);
}

TEST_CASE("report JSON carries wo, tr and s with null for absent views") {
  MetricsReport r;
  r.wo = 0.5;
  r.tr["SF,F"] = 0.75;
  r.tr["AD,F"] = std::nullopt;
  const auto text = report_to_json(r);
  CHECK(text.find("\"wo\"") != std::string::npos);
  CHECK(text.find("\"tr\"") != std::string::npos);
  CHECK(text.find("\"s\"") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
}
