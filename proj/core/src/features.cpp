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

#include "mfatigue/features.hpp"

#include <algorithm>
#include <cmath>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"

namespace mfatigue {

Eigen::Index nmf_decimation(double emg_rate, const SynergyConfig& cfg) {
  if (!(cfg.nmf_rate_hz > 0)) return 1;
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(emg_rate / cfg.nmf_rate_hz)));
}

Matrix window_activation(const Matrix& activation, const WindowSpan& span, Eigen::Index step) {
  const Eigen::Index len = span.emg_end - span.emg_begin;
  if (len <= 0) throw Error(ErrorCode::EmptyWindow, "empty EMG window");
  const Eigen::Index cols = (len + step - 1) / step;
  Matrix out(activation.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) out.col(j) = activation.col(span.emg_begin + j * step);
  return out;
}

std::vector<FeatureSample> extract_features(const SessionData& session, const FeatureConfig& cfg,
                                            std::uint64_t seed, FeatureDiagnostics* diagnostics) {
  const auto spans = window_stream(session, cfg.preprocess.window_s, cfg.preprocess.step_s);
  if (spans.empty()) return {};

  const Matrix activation = session_activation(session.emg, cfg.preprocess);
  const Eigen::Index step = nmf_decimation(session.emg.sample_rate, cfg.synergy);
  NmfOptions opts;
  opts.tol = cfg.synergy.nmf_tol;
  opts.max_iter = cfg.synergy.nmf_max_iter;

  const Matrix m0 = window_activation(activation, spans.front(), step);
  const auto count = select_synergy_count(m0, derive_seed(seed, {0xC0u}), cfg.synergy.vaf_threshold,
                                          cfg.synergy.select_restarts, opts);
  const auto ref = nmf_best(m0, count.n, derive_seed(seed, {0xF0u}), cfg.synergy.select_restarts, opts);
  if (diagnostics) {
    diagnostics->synergy_count = count.n;
    diagnostics->threshold_reached = count.threshold_reached;
    diagnostics->window0_vaf = ref.vaf;
    diagnostics->window_vaf.clear();
  }

  std::vector<FeatureSample> out;
  out.reserve(spans.size());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& span = spans[k];
    FeatureSample f;
    f.t_s = span.t_end;

    SynergyDecomposition dec;
    if (k == 0) {
      dec = ref;
    } else {
      const Matrix mt = window_activation(activation, span, step);
      if (mt.squaredNorm() > 0.0) {
        dec = nmf_best(mt, count.n, derive_seed(seed, {static_cast<std::uint64_t>(k)}),
                       cfg.synergy.window_restarts, opts);
      } else {
        dec.v = Matrix::Zero(ref.v.rows(), ref.v.cols());
        dec.c = Matrix::Zero(ref.v.cols(), mt.cols());
      }
    }
    if (diagnostics) diagnostics->window_vaf.push_back(dec.vaf);

    f.w = compensation_feature(fractionation(ref.v, dec.v));
    f.i = spike_variability_feature(dec.c, cfg.pooling);

    const Matrix shank = session.imu.shank.middleCols(span.imu_begin, span.imu_end - span.imu_begin);
    const Matrix thigh = session.imu.thigh.middleCols(span.imu_begin, span.imu_end - span.imu_begin);
    f.x = imu_features(shank, thigh);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mfatigue
