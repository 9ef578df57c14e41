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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfatigue/config.hpp"

namespace mfatigue {

enum class FeatureSource { Synergy, Baseline };

struct SessionArtifacts {
  StudyEntry entry;
  std::vector<FeatureSample> features;
  GroundTruthFatigue ground_truth;
  SubjectiveTimeline sf;
  std::optional<ADTrajectory> ad;
  FeatureDiagnostics diagnostics;
};

struct DatasetOptions {
  FeatureSource source = FeatureSource::Synergy;
  int jobs = 1;
  bool compute_ad = true;
  /// When set, session data and features.csv are written under this root.
  std::optional<std::filesystem::path> write_dir;
};

/// Feature extraction seed of one session, independent of scheduling.
std::uint64_t session_feature_seed(std::uint64_t seed, const StudyEntry& e);

/// Generates every synthetic session of cfg.synth and extracts its features.
std::vector<SessionArtifacts> build_dataset(const PipelineConfig& cfg, const DatasetOptions& opts);

struct SessionOutcome {
  std::size_t index = 0;
  RestartSummary scored;
  MetricsReport report;
};

struct StudySummary {
  int n_test = 0;
  double wo_literal = 0.0;    // means over test sessions
  double wo_three_way = 0.0;
  double tr_ground_truth = 0.0;
  double tr_sf = 0.0;
  std::optional<double> tr_ad;
  std::optional<double> tr_days;  // mean over same-subject day pairs
  int n_day_pairs = 0;
  std::optional<double> suitability;
  double mean_restart_std = 0.0;
};

struct StudyOutcome {
  DatasetSplit split;
  TrainResult training;
  std::vector<FatigueTrajectory> scored;  // every session, restart mean
  std::vector<SessionOutcome> test;
  std::vector<double> day_pair_tr;
  StudySummary summary;
};

/// Index of the same subject and session index on another day, if any.
std::optional<std::size_t> other_day_partner(const std::vector<SessionArtifacts>& data, std::size_t k);

/// Split, train, score every session with restart averaging and report the
/// test sessions.
StudyOutcome run_study(const std::vector<SessionArtifacts>& data, const PipelineConfig& cfg, std::uint64_t seed,
                       int jobs = 1);

std::string session_label(const StudyEntry& e);

/// Trained parameters plus the estimator settings needed to score with them.
struct ParamsFile {
  TrainableParams params;
  EstimatorConfig estimator;
};
std::string params_to_json(const ParamsFile& p);
void save_params(const ParamsFile& p, const std::filesystem::path& path);
ParamsFile load_params(const std::filesystem::path& path);

/// Study-level JSON: summary, per-test-session reports and the train log summary.
std::string study_report_json(const std::vector<SessionArtifacts>& data, const StudyOutcome& outcome);

}  // namespace mfatigue
