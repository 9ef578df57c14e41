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

#include <set>

#include <nlohmann/json.hpp>

#include "mfatigue/study.hpp"
#include "test_support.hpp"

using namespace mfatigue;

namespace {

PipelineConfig tiny_study() {
  auto cfg = PipelineConfig::for_profile("fast");
  cfg.synth.session_minutes = 0.75;
  cfg.training.max_epochs = 3;
  cfg.training.restarts_test = 5;
  return cfg;
}

const std::vector<SessionArtifacts>& tiny_dataset() {
  static const auto data = [] {
    DatasetOptions opts;
    opts.compute_ad = false;
    return build_dataset(tiny_study(), opts);
  }();
  return data;
}

}  // namespace

TEST_CASE("dataset covers every session with per-window features") {
  const auto& data = tiny_dataset();
  REQUIRE(data.size() == 12);
  for (const auto& s : data) {
    CHECK(s.features.size() == 11);
    CHECK(s.features.front().x.size() == kExerciseDim);
    CHECK_FALSE(s.ground_truth.g.empty());
    CHECK_FALSE(s.ad.has_value());
    CHECK(s.diagnostics.synergy_count >= 1);
  }
}

TEST_CASE("dataset is independent of the job count") {
  DatasetOptions opts;
  opts.compute_ad = false;
  opts.jobs = 3;
  const auto par = build_dataset(tiny_study(), opts);
  const auto& seq = tiny_dataset();
  REQUIRE(par.size() == seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    REQUIRE(par[k].features.size() == seq[k].features.size());
    for (std::size_t t = 0; t < seq[k].features.size(); ++t) {
      CHECK(par[k].features[t].w == seq[k].features[t].w);
      CHECK(par[k].features[t].i == seq[k].features[t].i);
    }
  }
}

TEST_CASE("feature seeds differ per session") {
  std::set<std::uint64_t> seeds;
  for (const auto& s : tiny_dataset()) seeds.insert(session_feature_seed(7, s.entry));
  CHECK(seeds.size() == 12);
}

TEST_CASE("day partners share subject and session index") {
  const auto& data = tiny_dataset();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto p = other_day_partner(data, k);
    REQUIRE(p.has_value());
    CHECK(data[*p].entry.subject == data[k].entry.subject);
    CHECK(data[*p].entry.session == data[k].entry.session);
    CHECK(data[*p].entry.day != data[k].entry.day);
  }
  CHECK(session_label(data[4].entry) == "S01/D2/session1");
}

TEST_CASE("study run reports every test session deterministically") {
  const auto& data = tiny_dataset();
  const auto cfg = tiny_study();
  const auto out = run_study(data, cfg, 7);
  CHECK(out.split.test.size() == 2);
  CHECK(out.split.val.size() == 1);
  CHECK(out.split.train.size() == 9);
  CHECK(out.scored.size() == data.size());
  REQUIRE(out.test.size() == 2);
  for (const auto& t : out.test) {
    CHECK(t.scored.spread.size() == data[t.index].features.size());
    REQUIRE(t.report.wo.has_value());
    CHECK(std::abs(*t.report.wo) <= 1.0);
    CHECK(t.report.tr.at("GT,F").has_value());
    CHECK(t.report.tr.at("SF,F").has_value());
    CHECK(t.report.tr.at("D1,D2").has_value());
  }
  CHECK(out.summary.n_test == 2);
  CHECK(out.summary.n_day_pairs == static_cast<int>(out.day_pair_tr.size()));
  CHECK(out.summary.n_day_pairs == 6);
  CHECK(out.summary.tr_days.has_value());
  CHECK(out.training.log.epochs.size() <= 3);

  const auto json = study_report_json(data, out);
  const auto parsed = nlohmann::json::parse(json);
  CHECK(parsed.contains("summary"));
  CHECK(parsed.contains("test_sessions"));
  CHECK(parsed.contains("training"));
  CHECK(parsed.contains("split"));
  CHECK(study_report_json(data, run_study(data, cfg, 7)) == json);
}

TEST_CASE("parameter files round trip") {
  ParamsFile p{TrainableParams::defaults(kExerciseDim), EstimatorConfig{}};
  p.params.beta.setLinSpaced(-0.5, 1.0 / 3.0);
  p.params.d_diag.setConstant(0.125);
  p.estimator.probit_exponent = 1;
  test::TempDir dir;
  save_params(p, dir / "params.json");
  const auto r = load_params(dir / "params.json");
  CHECK((r.params.beta - p.params.beta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.params.d_diag == p.params.d_diag);
  CHECK(r.estimator.probit_exponent == 1);
  CHECK(r.estimator.buffer_size == 50);
  test::write_text(dir / "bad.json", "{\"beta\": [1, 2]}");
  CHECK_THROWS_AS(load_params(dir / "bad.json"), Error);
}

TEST_CASE("dataset can be written to disk") {
  test::TempDir dir;
  auto cfg = tiny_study();
  cfg.synth.n_subjects = 1;
  cfg.synth.n_days = 1;
  cfg.synth.sessions_per_day = 1;
  DatasetOptions opts;
  opts.compute_ad = false;
  opts.write_dir = dir.path();
  const auto data = build_dataset(cfg, opts);
  REQUIRE(data.size() == 1);
  const auto sdir = dir.path() / session_relative_dir(0, 0, 0);
  CHECK(std::filesystem::exists(sdir / "emg.csv"));
  const auto feats = load_features(sdir / "features.csv");
  REQUIRE(feats.size() == data[0].features.size());
  CHECK(std::abs(feats[3].w - data[0].features[3].w) < 1e-12);
}
