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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfatigue {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultEmgRate = 1111.11;
inline constexpr double kDefaultImuRate = 148.0;
inline constexpr double kDefaultFootRate = 500.0;
inline constexpr int kExerciseDim = 48;

/// Muscle order used by the 9-channel layout.
const std::vector<std::string>& default_muscle_names();

/// Multichannel EMG, one row per muscle.
struct EmgRecording {
  Matrix channels;  // muscles x samples
  double sample_rate = kDefaultEmgRate;
  std::vector<std::string> muscle_names;

  Eigen::Index muscles() const { return channels.rows(); }
  Eigen::Index samples() const { return channels.cols(); }
  double duration() const { return static_cast<double>(samples()) / sample_rate; }
};

/// Shank and thigh IMUs; rows are gx, gy, gz (rad/s), ax, ay, az (m/s^2).
struct ImuRecording {
  Matrix shank;  // 6 x samples
  Matrix thigh;  // 6 x samples
  double sample_rate = kDefaultImuRate;

  Eigen::Index samples() const { return shank.cols(); }
  double duration() const { return static_cast<double>(samples()) / sample_rate; }
};

struct FootPressureRecording {
  Vector heel;
  Vector metatarsal;
  double sample_rate = kDefaultFootRate;

  Eigen::Index samples() const { return heel.size(); }
  double duration() const { return static_cast<double>(samples()) / sample_rate; }
};

struct SubjectiveEntry {
  double t_s = 0.0;
  int likert = 4;  // 1 = strongly agree "I feel exhausted" ... 7 = strongly disagree
};

struct SubjectiveTimeline {
  std::vector<SubjectiveEntry> entries;
};

enum class FatigueShape { Linear, ExponentialSaturating, Sigmoid };

std::string to_string(FatigueShape shape);
FatigueShape fatigue_shape_from_string(const std::string& name);

/// Latent fatigue known only for synthetic sessions.
struct GroundTruthFatigue {
  std::vector<double> t_s;
  std::vector<double> g;
  FatigueShape shape = FatigueShape::Linear;
};

struct SessionData {
  EmgRecording emg;
  ImuRecording imu;
  FootPressureRecording foot;
  SubjectiveTimeline sf;
  std::string subject_id;
  std::string day_id;
  int session_index = 0;
  std::optional<GroundTruthFatigue> ground_truth;

  /// Wall-clock span shared by all streams (the shortest one).
  double duration() const;
};

/// Per-window estimator input.
struct FeatureSample {
  double t_s = 0.0;  // window end
  double w = 0.0;    // synergy compensation
  double i = 0.0;    // spike-timing variability
  Vector x;          // exercise vector
};

struct TrajectoryPoint {
  double t_s = 0.0;
  double f = 0.5;
};

struct FatigueTrajectory {
  std::vector<TrajectoryPoint> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<double> times() const;
  std::vector<double> values() const;
};

/// Study-level evaluation summary. Absent views are reported as null.
struct MetricsReport {
  std::optional<double> wo;            // literal complement reading
  std::optional<double> wo_three_way;  // in-band points counted in neither set
  std::map<std::string, std::optional<double>> tr;
  std::optional<double> suitability;
};

/// Throws Error on any invariant violation; used by load_session and synth.
void validate_session(const SessionData& session);
void validate_trajectory(const FatigueTrajectory& traj);

// File formats ---------------------------------------------------------------

SessionData load_session(const std::filesystem::path& dir);
void save_session(const SessionData& session, const std::filesystem::path& dir);

void save_trajectory(const FatigueTrajectory& traj, const std::filesystem::path& path);
FatigueTrajectory load_trajectory(const std::filesystem::path& path);

void save_features(const std::vector<FeatureSample>& features, const std::filesystem::path& path);
std::vector<FeatureSample> load_features(const std::filesystem::path& path);

void save_ground_truth(const GroundTruthFatigue& gt, const std::filesystem::path& path);
GroundTruthFatigue load_ground_truth(const std::filesystem::path& path);

std::string report_to_json(const MetricsReport& report, int indent = 2);
void save_report(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace mfatigue
