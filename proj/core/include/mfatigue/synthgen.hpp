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

// Deterministic synthetic study generator. A known fatigue curve g(t)
// drives three observable channels with separate gains: synergy
// fractionation, spike-timing jitter of the module activations and EMG
// amplitude/spectral drift.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/metrics.hpp"

namespace mfatigue {

struct SynthConfig {
  int n_subjects = 4;
  int n_days = 2;
  int sessions_per_day = 3;
  double session_minutes = 5.0;
  double gait_period_s = 1.1;
  Matrix base_synergies;  // muscles x n*, non-negative, unit columns
  std::vector<double> synergy_phases;  // activation phase of each synergy in the cycle
  double fractionation_gain = 1.0;
  double jitter_gain = 1.0;
  double drift_gain = 1.0;
  double noise_std = 0.02;
  std::uint64_t seed = 7;
  double emg_rate = kDefaultEmgRate;
  double imu_rate = kDefaultImuRate;
  double foot_rate = kDefaultFootRate;
  double sf_interval_s = 60.0;
  double channel_gain_min = 0.8;
  double channel_gain_max = 1.2;
  int split_synergy = 0;  // index of the synergy that fractionates

  /// 4 subjects x 2 days x 3 sessions x 5 min at 1111.11 Hz.
  static SynthConfig default_profile();
  /// 2 subjects x 2 days x 3 sessions x 3 min at 250 Hz.
  static SynthConfig fast_profile();
  /// 10 subjects x 2 days x 3 sessions x 20 min, SF every 5 min.
  static SynthConfig paper_profile();
  static SynthConfig profile(const std::string& name);

  int muscles() const { return static_cast<int>(base_synergies.rows()); }
  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Canonical 9-muscle walking synergies (weight acceptance, propulsion,
/// early swing, late swing).
Matrix default_base_synergies();
std::vector<double> default_synergy_phases();

/// Ground-truth curve for a subject; identical across that subject's days.
GroundTruthFatigue ground_truth_curve(const SynthConfig& cfg, int subject, double duration_s,
                                      double resolution_s = 1.0);

/// Everything the generator knows about a session, for oracle tests.
struct SessionDetail {
  SessionData session;
  Matrix activation;             // injected envelope per muscle at the EMG rate
  Vector channel_gain;           // per-day electrode gain
  Matrix synergies_at_start;     // V(0) including the split column (zero at g=0)
  std::vector<GaitPhase> phases;  // true phase per foot-pressure sample
};

SessionDetail generate_session_detail(const SynthConfig& cfg, int subject, int day, int session_idx);
SessionData generate_session(const SynthConfig& cfg, int subject, int day, int session_idx);

struct StudyEntry {
  int subject = 0;
  int day = 0;
  int session = 0;
  std::filesystem::path dir;
};

/// Relative directory for one session: S01/D1/session0.
std::filesystem::path session_relative_dir(int subject, int day, int session);

/// Writes every session of the study below `out_dir`.
std::vector<StudyEntry> generate_study(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace mfatigue
