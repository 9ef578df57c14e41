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

#include <optional>
#include <vector>

#include "mfatigue/datamodel.hpp"

namespace mfatigue {

struct FilterSpec {
  enum class Kind { Bandpass, Lowpass };

  Kind kind = Kind::Bandpass;
  int order = 6;  // total digital order; band-pass uses an order/2 prototype
  double low_hz = 20.0;
  double high_hz = 500.0;  // low-pass uses high_hz as its cut-off
  bool zero_phase = true;

  static FilterSpec bandpass(int order, double low_hz, double high_hz) {
    return {Kind::Bandpass, order, low_hz, high_hz, true};
  }
  static FilterSpec lowpass(int order, double cutoff_hz) {
    return {Kind::Lowpass, order, 0.0, cutoff_hz, true};
  }
};

/// One second-order section, direct form II transposed, a0 == 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Butterworth filter realized as cascaded second-order sections.
class SosFilter {
 public:
  /// Bilinear-transform design with frequency prewarping.
  /// Throws InvalidCutoff when a cut-off is not inside (0, Nyquist).
  static SosFilter butterworth(const FilterSpec& spec, double fs);

  const std::vector<Biquad>& sections() const { return sections_; }
  int order() const { return order_; }

  /// Causal pass. When `x0` is given, section states start at the
  /// steady state for a constant input of that value.
  Vector apply(const Vector& x, std::optional<double> x0 = std::nullopt) const;

  /// Forward-backward pass with odd-reflection padding of 3 x order samples.
  Vector apply_zero_phase(const Vector& x) const;

  /// Magnitude response of one forward pass at `freq_hz`.
  double magnitude(double freq_hz, double fs) const;

 private:
  std::vector<Biquad> sections_;
  int order_ = 0;
};

Vector butterworth_zero_phase(const Vector& signal, double fs, const FilterSpec& spec);

struct EnvelopeConfig {
  int order = 4;
  double cutoff_hz = 10.0;
};

/// Full-wave rectification followed by a zero-phase low-pass; clamped >= 0.
Vector activation_envelope(const Vector& bandpassed, double fs, const EnvelopeConfig& cfg = {});

/// Recursive activation dynamics followed by exponential shaping:
///   u(t) = gain * e(t - d) - c1 * u(t-1) - c2 * u(t-2)
///   a(t) = (exp(A u) - 1) / (exp(A) - 1)
/// The defaults are placeholders; the literature source gives no constants.
struct ActivationParams {
  std::optional<double> gain;  // unset: 1 + c1 + c2, i.e. unit DC gain
  int delay = 0;
  double c1 = -0.5;
  double c2 = 0.1;
  double shape_a = -1.0;

  double resolved_gain() const { return gain.value_or(1.0 + c1 + c2); }
};

/// Shaping nonlinearity alone; A == 0 degenerates to the identity.
double activation_shaping(double u, double shape_a) noexcept;

/// Expects an envelope already normalized to [0, 1]. Output is clamped to [0, 1].
/// Throws UnstableFilter when 1 + c1 z^-1 + c2 z^-2 has a root outside the unit circle.
Vector muscle_activation(const Vector& normalized_envelope, const ActivationParams& params);

struct PreprocessConfig {
  int bandpass_order = 6;
  double bandpass_low_hz = 20.0;
  double bandpass_high_hz = 500.0;
  EnvelopeConfig envelope;
  double normalization_percentile = 99.0;
  ActivationParams activation;
  double window_s = 4.0;
  double step_s = 4.0;
};

/// Band-pass spec for a given EMG rate. The upper edge is pulled below
/// Nyquist (to 0.9 x Nyquist) for low-rate recordings.
FilterSpec emg_bandpass(const PreprocessConfig& cfg, double fs);

/// EMG -> muscle activation for every channel, at the EMG rate. Each
/// channel's envelope is divided by its percentile over the first window
/// (frozen thereafter) and clipped to [0, 1].
Matrix session_activation(const EmgRecording& emg, const PreprocessConfig& cfg);

/// Band-passed EMG for every channel.
Matrix session_bandpassed(const EmgRecording& emg, const PreprocessConfig& cfg);

struct WindowSpan {
  Eigen::Index emg_begin = 0, emg_end = 0;  // half-open sample ranges
  Eigen::Index imu_begin = 0, imu_end = 0;
  double t_start = 0.0;
  double t_end = 0.0;
};

inline constexpr double kMinWindowSeconds = 2.0;

/// Time-aligned windows over both streams; a trailing partial window is
/// dropped. Throws WindowTooShort for window_s < 2.
std::vector<WindowSpan> window_stream(double duration_s, double emg_rate, double imu_rate,
                                      double window_s, double step_s);
std::vector<WindowSpan> window_stream(const SessionData& session, double window_s, double step_s);

/// Per axis (shank gx..az, then thigh gx..az): mean, population std, RMS and
/// waveform length, giving 12 x 4 = 48 values.
Vector imu_features(const Matrix& shank_window, const Matrix& thigh_window);

/// Per channel: mean absolute value, zero crossings, slope-sign changes and
/// waveform length. Counts use a dead band of `deadband_frac` x channel std.
Vector hudgins_features(const Matrix& emg_window, double deadband_frac = 0.01);

}  // namespace mfatigue
