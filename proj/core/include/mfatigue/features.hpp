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

// Session -> per-window (W_t, I_t, x_t) feature extraction.

#include <cstdint>
#include <vector>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/preprocess.hpp"
#include "mfatigue/spinal.hpp"
#include "mfatigue/synergy.hpp"

namespace mfatigue {

struct SynergyConfig {
  double vaf_threshold = 0.90;
  int select_restarts = 10;  // restarts when choosing n on window 0
  int window_restarts = 3;   // restarts per window afterwards
  double nmf_tol = 1e-6;
  int nmf_max_iter = 500;
  // Activation is low-passed at 10 Hz; the factorization runs on a
  // decimated copy at this rate.
  double nmf_rate_hz = 100.0;
};

struct FeatureConfig {
  PreprocessConfig preprocess;
  SynergyConfig synergy;
  Pooling pooling = Pooling::Or;
};

struct FeatureDiagnostics {
  int synergy_count = 0;
  bool threshold_reached = true;
  double window0_vaf = 0.0;
  std::vector<double> window_vaf;
};

/// Decimation step used for a given EMG rate.
Eigen::Index nmf_decimation(double emg_rate, const SynergyConfig& cfg);

/// Decimated activation slice for one window.
Matrix window_activation(const Matrix& activation, const WindowSpan& span, Eigen::Index step);

/// Runs the whole feature pipeline for one session. The synergy count is
/// chosen on window 0 and frozen; V_0 from window 0 anchors the
/// fractionation matrices of every later window.
std::vector<FeatureSample> extract_features(const SessionData& session, const FeatureConfig& cfg,
                                            std::uint64_t seed,
                                            FeatureDiagnostics* diagnostics = nullptr);

}  // namespace mfatigue
