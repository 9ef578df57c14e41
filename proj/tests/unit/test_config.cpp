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

#include "mfatigue/config.hpp"
#include "mfatigue/error.hpp"
#include "test_support.hpp"

using namespace mfatigue;

namespace {

ErrorCode parse_code(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("defaults carry the documented values") {
  const PipelineConfig c;
  CHECK(c.training.lr == 0.1);
  CHECK(c.training.batch_size == 100);
  CHECK(c.training.max_epochs == 1000);
  CHECK(c.training.patience == 3);
  CHECK(c.training.tol == 0.001);
  CHECK(c.training.restarts_test == 100);
  CHECK(c.estimator.buffer_size == 50);
  CHECK(c.estimator.probit_exponent == 2);
  CHECK(c.features.preprocess.window_s == 4.0);
  CHECK(c.features.preprocess.bandpass_order == 6);
  CHECK(c.features.synergy.vaf_threshold == 0.90);
  CHECK(c.init.d_init == 1.0);
  CHECK(c.metrics.wo_mode == WoMode::Literal);
  CHECK(PipelineConfig::for_profile("fast").synth.emg_rate == 250.0);
}

TEST_CASE("values are applied per section") {
  const auto c = parse_config(R"(
[preprocess]
window_s = 8.0
activation_gain = 0.75
[spinal]
pooling = "concat"
[estimator]
probit_exponent = 1
[training]
lr = 0.05
loss_delta = 0.02
split = [0.6, 0.2, 0.2]
[metrics]
wo_mode = "three_way"
[synth]
n_subjects = 3
)");
  CHECK(c.features.preprocess.window_s == 8.0);
  CHECK(c.features.preprocess.activation.gain == 0.75);
  CHECK(c.features.pooling == Pooling::Concat);
  CHECK(c.estimator.probit_exponent == 1);
  CHECK(c.training.lr == 0.05);
  REQUIRE(c.training.loss_delta.has_value());
  CHECK(*c.training.loss_delta == 0.02);
  CHECK(c.training.split[1] == 0.2);
  CHECK(c.metrics.wo_mode == WoMode::ThreeWay);
  CHECK(c.synth.n_subjects == 3);
  CHECK(c.synth.emg_rate == kDefaultEmgRate);
}

TEST_CASE("optional values accept auto") {
  auto base = PipelineConfig{};
  base.training.loss_delta = 0.3;
  const auto c = parse_config("[training]\nloss_delta = \"auto\"\n", base);
  CHECK_FALSE(c.training.loss_delta.has_value());
}

TEST_CASE("unknown keys, sections and bad values are rejected") {
  CHECK(parse_code("[training]\nlearning_rate = 0.1\n") == ErrorCode::ConfigError);
  CHECK(parse_code("[optimizer]\nlr = 0.1\n") == ErrorCode::ConfigError);
  CHECK(parse_code("[training]\nlr = \"fast\"\n") == ErrorCode::ConfigError);
  CHECK(parse_code("[spinal]\npooling = \"sum\"\n") == ErrorCode::ConfigError);
  CHECK(parse_code("[synth]\njitter_gain = -1.0\n") == ErrorCode::ConfigError);
  CHECK(parse_code("[training]\nsplit = [0.5, 0.1]\n") == ErrorCode::ConfigError);
  try {
    parse_config("[training]\nlr = 0.1\nbatch_size = = 3\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    REQUIRE(e.line.has_value());
    CHECK(*e.line == 3);
  }
}

TEST_CASE("resolved configuration round trips") {
  auto c = PipelineConfig::for_profile("fast");
  c.training.lr = 0.0123;
  c.training.loss_delta = 0.25;
  c.features.preprocess.activation.gain = 0.6;
  c.metrics.tolerance = ToleranceMode::RunningStd;
  c.synth.fractionation_gain = 1.5;
  const auto text = to_toml(c);
  const auto r = parse_config(text);
  CHECK(to_toml(r) == text);
  CHECK(r.training.lr == 0.0123);
  CHECK(r.synth.base_synergies == c.synth.base_synergies);
  CHECK(r.synth.emg_rate == 250.0);
  CHECK(r.metrics.tolerance == ToleranceMode::RunningStd);

  test::TempDir dir;
  save_config(c, dir / "c.toml");
  CHECK(to_toml(load_config(dir / "c.toml")) == text);
}

TEST_CASE("every section appears in the resolved output") {
  const auto text = to_toml(PipelineConfig{});
  for (const char* section : {"[preprocess]", "[synergy]", "[spinal]", "[estimator]", "[training]", "[metrics]",
                              "[synth]"}) {
    CHECK(text.find(section) != std::string::npos);
  }
  CHECK(text.find("loss_delta = 'auto'") != std::string::npos);
}

TEST_CASE("missing config file is a data error") {
  try {
    load_config("/nonexistent/mfatigue.toml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(is_data_error(e.code()));
  }
}
