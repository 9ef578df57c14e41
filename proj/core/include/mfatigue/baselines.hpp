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
#include <vector>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/preprocess.hpp"

namespace mfatigue {

struct WelchConfig {
  double segment_s = 0.5;
  double overlap = 0.5;
};

struct RmsMdf {
  Vector rms;
  Vector mdf;  // 0 where the spectrum is empty
};

/// One-sided Welch PSD with a periodic Hann window and per-segment mean removal.
struct Spectrum {
  Vector freq;
  Vector power;
};
Spectrum welch_psd(const Vector& x, double fs, const WelchConfig& cfg = {});

/// Frequency splitting the spectrum into equal-power halves; 0 if empty.
double median_frequency(const Spectrum& s);

/// Per-channel RMS and median frequency of a (channels x samples) window.
RmsMdf rms_mdf(const Matrix& emg_window, double fs, const WelchConfig& cfg = {});

struct PrincipalComponent {
  Vector scores;
  Vector loading;
  Vector explained;  // covariance eigenvalues, descending
};

/// First principal component of z-scored columns. The loading's
/// largest-magnitude entry is made positive.
PrincipalComponent first_pc(const Matrix& features);

/// Affine map of v onto [lo, hi]; constant input maps to the midpoint.
Vector min_max_scale(const Vector& v, double lo = 0.0, double hi = 4.0);

struct BaselineFeatures {
  std::vector<double> p_rms;
  std::vector<double> p_mdf;
};

/// P_RMS and P_MDF per window of the band-passed EMG.
BaselineFeatures baseline_features(const SessionData& session, const PreprocessConfig& cfg,
                                   const WelchConfig& welch = {});

/// Same windows and exercise vectors as the synergy features, with (W, I)
/// replaced by the min-max scaled (P_RMS, P_MDF).
std::vector<FeatureSample> baseline_feature_samples(const SessionData& session, const PreprocessConfig& cfg,
                                                    const WelchConfig& welch = {});

/// Replaces W and I in existing samples; windows must line up.
void substitute_baseline(std::vector<FeatureSample>& samples, const BaselineFeatures& b);

}  // namespace mfatigue
