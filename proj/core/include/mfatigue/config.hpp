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

#include <filesystem>
#include <string>

#include "mfatigue/baselines.hpp"
#include "mfatigue/estimator.hpp"
#include "mfatigue/features.hpp"
#include "mfatigue/metrics.hpp"
#include "mfatigue/synthgen.hpp"
#include "mfatigue/training.hpp"

namespace mfatigue {

/// Initial values for the trainable estimator parameters.
struct EstimatorInit {
  double d_init = 1.0;
  double sigma_n2 = 1.0;

  TrainableParams params(Eigen::Index dim = kExerciseDim) const;
};

/// Every tunable of the pipeline, grouped by TOML section.
struct PipelineConfig {
  FeatureConfig features;  // [preprocess], [synergy], [spinal]
  WelchConfig welch;       // [preprocess] welch_*
  EstimatorConfig estimator;
  EstimatorInit init;      // [estimator] d_init, sigma_n2
  TrainConfig training;
  MetricsConfig metrics;
  SynthConfig synth = SynthConfig::default_profile();

  /// Defaults with the synth section taken from a named profile.
  static PipelineConfig for_profile(const std::string& profile);
};

/// Applies a TOML document on top of `base`. Unknown sections or keys and
/// ill-typed values throw ConfigError.
PipelineConfig parse_config(const std::string& toml_text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Fully resolved configuration as TOML; parse_config(to_toml(c)) == c.
std::string to_toml(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace mfatigue
