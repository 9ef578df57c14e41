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

#include "mfatigue/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"

namespace mfatigue {

Spectrum welch_psd(const Vector& x, double fs, const WelchConfig& cfg) {
  const auto nseg = static_cast<Eigen::Index>(std::llround(cfg.segment_s * fs));
  if (nseg < 2 || x.size() < nseg) {
    throw Error(ErrorCode::WindowTooShort, "Welch needs at least one " + std::to_string(cfg.segment_s) +
                                               " s segment");
  }
  const auto hop = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(nseg * (1.0 - cfg.overlap))));
  Vector window(nseg);
  for (Eigen::Index k = 0; k < nseg; ++k) window(k) = 0.5 - 0.5 * std::cos(2.0 * kPi * k / nseg);
  const double win_energy = window.squaredNorm();

  const Eigen::Index bins = nseg / 2 + 1;
  Spectrum s;
  s.freq.resize(bins);
  for (Eigen::Index k = 0; k < bins; ++k) s.freq(k) = fs * k / nseg;
  s.power = Vector::Zero(bins);

  Eigen::FFT<double> fft;
  std::vector<double> seg(static_cast<std::size_t>(nseg));
  std::vector<std::complex<double>> spec;
  int count = 0;
  for (Eigen::Index start = 0; start + nseg <= x.size(); start += hop) {
    const double mu = x.segment(start, nseg).mean();
    for (Eigen::Index k = 0; k < nseg; ++k) seg[static_cast<std::size_t>(k)] = (x(start + k) - mu) * window(k);
    fft.fwd(spec, seg);
    for (Eigen::Index k = 0; k < bins; ++k) s.power(k) += std::norm(spec[static_cast<std::size_t>(k)]);
    ++count;
  }
  s.power /= count * fs * win_energy;
  // One-sided: double everything except DC and (even-length) Nyquist.
  const Eigen::Index last = nseg % 2 == 0 ? bins - 1 : bins;
  for (Eigen::Index k = 1; k < last; ++k) s.power(k) *= 2.0;
  return s;
}

double median_frequency(const Spectrum& s) {
  const double total = s.power.sum();
  if (!(total > 0.0)) return 0.0;
  const double half = 0.5 * total;
  double cum = 0.0;
  for (Eigen::Index k = 0; k < s.power.size(); ++k) {
    const double next = cum + s.power(k);
    if (next >= half) {
      if (k == 0 || s.power(k) <= 0.0) return s.freq(k);
      const double frac = (half - cum) / s.power(k);
      return s.freq(k - 1) + frac * (s.freq(k) - s.freq(k - 1));
    }
    cum = next;
  }
  return s.freq(s.freq.size() - 1);
}

RmsMdf rms_mdf(const Matrix& emg_window, double fs, const WelchConfig& cfg) {
  RmsMdf out;
  out.rms.resize(emg_window.rows());
  out.mdf.resize(emg_window.rows());
  for (Eigen::Index ch = 0; ch < emg_window.rows(); ++ch) {
    const Vector x = emg_window.row(ch).transpose();
    const auto spectrum = welch_psd(x, fs, cfg);
    out.rms(ch) = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
    out.mdf(ch) = median_frequency(spectrum);
  }
  return out;
}

PrincipalComponent first_pc(const Matrix& features) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw Error(ErrorCode::TooShort, "first_pc needs at least 2 windows");
  Matrix z = features.rowwise() - features.colwise().mean();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12) {
      z.col(j) /= sd;
    } else {
      z.col(j).setZero();
    }
  }
  if (z.squaredNorm() == 0.0) throw Error(ErrorCode::DegenerateInput, "first_pc: all columns constant");
  const Matrix cov = z.transpose() * z / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  PrincipalComponent pc;
  pc.explained = eig.eigenvalues().reverse();
  pc.loading = eig.eigenvectors().col(cov.cols() - 1);
  Eigen::Index arg = 0;
  pc.loading.cwiseAbs().maxCoeff(&arg);
  if (pc.loading(arg) < 0) pc.loading = -pc.loading;
  pc.scores = z * pc.loading;
  return pc;
}

Vector min_max_scale(const Vector& v, double lo, double hi) {
  if (v.size() == 0) return v;
  const double mn = v.minCoeff();
  const double mx = v.maxCoeff();
  if (!(mx > mn)) return Vector::Constant(v.size(), 0.5 * (lo + hi));
  return ((v.array() - mn) / (mx - mn) * (hi - lo) + lo).matrix();
}

BaselineFeatures baseline_features(const SessionData& session, const PreprocessConfig& cfg,
                                   const WelchConfig& welch) {
  const auto spans = window_stream(session, cfg.window_s, cfg.step_s);
  if (spans.empty()) return {};
  const Matrix bp = session_bandpassed(session.emg, cfg);
  const auto n = static_cast<Eigen::Index>(spans.size());
  Matrix rms(n, bp.rows()), mdf(n, bp.rows());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& span = spans[static_cast<std::size_t>(k)];
    const auto r = rms_mdf(bp.middleCols(span.emg_begin, span.emg_end - span.emg_begin),
                           session.emg.sample_rate, welch);
    rms.row(k) = r.rms.transpose();
    mdf.row(k) = r.mdf.transpose();
  }
  BaselineFeatures out;
  if (n < 2) {
    out.p_rms.assign(1, 0.0);
    out.p_mdf.assign(1, 0.0);
    return out;
  }
  const Vector p_rms = first_pc(rms).scores;
  const Vector p_mdf = first_pc(mdf).scores;
  out.p_rms.assign(p_rms.data(), p_rms.data() + n);
  out.p_mdf.assign(p_mdf.data(), p_mdf.data() + n);
  return out;
}

void substitute_baseline(std::vector<FeatureSample>& samples, const BaselineFeatures& b) {
  if (b.p_rms.size() != samples.size() || b.p_mdf.size() != samples.size()) {
    throw Error(ErrorCode::ShapeMismatch, "baseline window count differs from feature windows");
  }
  if (samples.empty()) return;
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Vector w = min_max_scale(Eigen::Map<const Vector>(b.p_rms.data(), n));
  const Vector i = min_max_scale(Eigen::Map<const Vector>(b.p_mdf.data(), n));
  for (Eigen::Index k = 0; k < n; ++k) {
    samples[static_cast<std::size_t>(k)].w = w(k);
    samples[static_cast<std::size_t>(k)].i = i(k);
  }
}

std::vector<FeatureSample> baseline_feature_samples(const SessionData& session, const PreprocessConfig& cfg,
                                                    const WelchConfig& welch) {
  const auto spans = window_stream(session, cfg.window_s, cfg.step_s);
  std::vector<FeatureSample> out;
  out.reserve(spans.size());
  for (const auto& span : spans) {
    FeatureSample f;
    f.t_s = span.t_end;
    const auto len = span.imu_end - span.imu_begin;
    f.x = imu_features(session.imu.shank.middleCols(span.imu_begin, len),
                       session.imu.thigh.middleCols(span.imu_begin, len));
    out.push_back(std::move(f));
  }
  substitute_baseline(out, baseline_features(session, cfg, welch));
  return out;
}

}  // namespace mfatigue
