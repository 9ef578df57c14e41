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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/preprocess.hpp"

namespace mfatigue {

// Weak monotonicity --------------------------------------------------------

/// Literal: every point not above J(t-1) + delta counts against.
/// ThreeWay: only points below J(t-1) - delta count against; in-band points
/// count in neither set.
enum class WoMode { Literal, ThreeWay };
/// GlobalStd: delta = std(J). RunningStd: delta(t-1) = std(J[0..t-1]).
enum class ToleranceMode { GlobalStd, RunningStd };

WoMode wo_mode_from_string(const std::string& s);
ToleranceMode tolerance_mode_from_string(const std::string& s);
std::string to_string(WoMode m);
std::string to_string(ToleranceMode m);

struct WoCounts {
  int plus = 0;
  int minus = 0;
  double wo = 0.0;
};

WoCounts weak_monotonicity_counts(std::span<const double> j, WoMode mode = WoMode::Literal,
                                  ToleranceMode tol = ToleranceMode::GlobalStd);
double weak_monotonicity(std::span<const double> j, WoMode mode = WoMode::Literal,
                         ToleranceMode tol = ToleranceMode::GlobalStd);

/// Pearson coefficient; degenerate (constant) input reported as 0 with a flag.
Correlation trendability(std::span<const double> a, std::span<const double> b);

double suitability(double wo1, double wo2, double tr) noexcept;

/// Values of `traj` at `targets` (clamped to the trajectory's time span).
/// Sparser targets get a block mean over each target's neighbourhood;
/// otherwise a natural cubic interpolating spline is evaluated.
std::vector<double> resample_to(const FatigueTrajectory& traj, std::span<const double> targets);

// Gait phases --------------------------------------------------------------

enum class GaitPhase : std::uint8_t { Swing = 0, InitialContact = 1, Midstance = 2, Propulsion = 3 };
inline constexpr int kGaitPhaseCount = 4;

struct GaitThresholds {
  double fraction = 0.10;     // of the channel's reference percentile
  double percentile = 95.0;
};

struct GaitPhaseLabels {
  std::vector<GaitPhase> labels;
  double sample_rate = kDefaultFootRate;
};

GaitPhase classify_contact(bool heel_on, bool meta_on) noexcept;
GaitPhaseLabels gait_phase_labels(const FootPressureRecording& foot, const GaitThresholds& th = {});

// Accuracy degradation -----------------------------------------------------

struct AdConfig {
  double window_ms = 128.0;
  double step_ms = 15.0;
  double train_minutes = 2.0;
  double bin_s = 60.0;
  double deadband_frac = 0.01;
  double ridge = 1e-6;  // relative to the mean pooled variance
};

struct ADPoint {
  double t_s = 0.0;
  double drop = 0.0;
};

struct ADTrajectory {
  std::vector<ADPoint> points;
  std::vector<double> bin_accuracy;
  double train_accuracy = 0.0;
  bool class_missing = false;  // some phase absent in training; affected bins skipped
};

/// Gaussian class-conditional linear discriminant with a pooled covariance.
class LinearDiscriminant {
 public:
  void fit(const Matrix& x, const std::vector<int>& labels, int classes, double ridge = 1e-6);
  int predict(const Vector& x) const;
  bool has_class(int c) const { return c >= 0 && c < static_cast<int>(present_.size()) && present_[c]; }

 private:
  Matrix means_;  // classes x d
  Matrix weights_;
  Vector bias_;
  Vector center_;
  Vector scale_;
  std::vector<bool> present_;
};

/// AD from precomputed window features (rows = windows) with labels and
/// window-end times.
ADTrajectory accuracy_degradation_from_features(const Matrix& features, const std::vector<int>& labels,
                                                const std::vector<double>& times, const AdConfig& cfg);

/// Hudgins features over short windows of band-passed EMG, labels from the
/// majority gait phase in each window. Requires >= train_minutes + 1 min.
ADTrajectory accuracy_degradation(const SessionData& session, const AdConfig& cfg = {},
                                  const PreprocessConfig& pre = {}, const GaitThresholds& th = {});

// Report -------------------------------------------------------------------

struct ReportInputs {
  const FatigueTrajectory* f = nullptr;
  const SubjectiveTimeline* sf = nullptr;
  const ADTrajectory* ad = nullptr;
  const FatigueTrajectory* f_other_day = nullptr;
  const GroundTruthFatigue* ground_truth = nullptr;
};

struct MetricsConfig {
  WoMode wo_mode = WoMode::Literal;
  ToleranceMode tolerance = ToleranceMode::GlobalStd;
  AdConfig ad;
  GaitThresholds gait;
};

/// Fatigue-oriented SF values (8 - Likert) so higher means more fatigued.
std::vector<double> sf_fatigue_values(const SubjectiveTimeline& sf);

/// WO of F (both modes), Tr against every available view ("AD,F", "SF,F",
/// "D1,D2", "GT,F") and S for the two days. Missing views become null.
MetricsReport full_report(const ReportInputs& in, const MetricsConfig& cfg = {});

}  // namespace mfatigue
