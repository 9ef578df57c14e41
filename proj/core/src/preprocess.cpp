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

#include "mfatigue/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"

namespace mfatigue {

namespace {

using cplx = std::complex<double>;

cplx bilinear(cplx s) { return (1.0 + s) / (1.0 - s); }

std::vector<cplx> butterworth_prototype(int n) {
  std::vector<cplx> poles;
  for (int k = 0; k < n; ++k) {
    const double theta = kPi * (2.0 * k + n + 1) / (2.0 * n);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

// Groups digital poles into conjugate pairs (or pairs of real poles).
std::vector<std::pair<cplx, std::optional<cplx>>> pair_poles(std::vector<cplx> poles) {
  constexpr double kRealTol = 1e-10;
  std::vector<std::pair<cplx, std::optional<cplx>>> out;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) <= kRealTol) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      out.emplace_back(p, std::conj(p));
    }
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) out.emplace_back(reals[i], cplx(reals[i + 1]));
  if (reals.size() % 2 == 1) out.emplace_back(reals.back(), std::nullopt);
  return out;
}

cplx section_response(const Biquad& s, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

}  // namespace

SosFilter SosFilter::butterworth(const FilterSpec& spec, double fs) {
  if (!(fs > 0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  const double nyquist = 0.5 * fs;
  if (spec.order < 1) throw Error(ErrorCode::InvalidArgument, "filter order must be >= 1");

  SosFilter f;
  f.order_ = spec.order;
  std::vector<cplx> poles;
  double ref_omega = 0.0;
  bool bandpass = spec.kind == FilterSpec::Kind::Bandpass;

  if (bandpass) {
    if (spec.order % 2 != 0) throw Error(ErrorCode::InvalidArgument, "band-pass order must be even");
    if (!(spec.low_hz > 0 && spec.low_hz < spec.high_hz && spec.high_hz < nyquist)) {
      throw Error(ErrorCode::InvalidCutoff, "band-pass cut-offs must satisfy 0 < low < high < Nyquist");
    }
    const double w1 = std::tan(kPi * spec.low_hz / fs);
    const double w2 = std::tan(kPi * spec.high_hz / fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;
    for (const auto& p : butterworth_prototype(spec.order / 2)) {
      const cplx pb = p * bw;
      const cplx disc = std::sqrt(pb * pb - 4.0 * w0sq);
      poles.push_back(bilinear(0.5 * (pb + disc)));
      poles.push_back(bilinear(0.5 * (pb - disc)));
    }
    ref_omega = 2.0 * std::atan(std::sqrt(w0sq));
  } else {
    if (!(spec.high_hz > 0 && spec.high_hz < nyquist)) {
      throw Error(ErrorCode::InvalidCutoff, "low-pass cut-off must be inside (0, Nyquist)");
    }
    const double wc = std::tan(kPi * spec.high_hz / fs);
    for (const auto& p : butterworth_prototype(spec.order)) poles.push_back(bilinear(p * wc));
  }

  for (const auto& [p, q] : pair_poles(poles)) {
    Biquad s;
    if (q) {
      s.a1 = -(p + *q).real();
      s.a2 = (p * *q).real();
      if (bandpass) {
        s.b0 = 1.0; s.b1 = 0.0; s.b2 = -1.0;
      } else {
        s.b0 = 1.0; s.b1 = 2.0; s.b2 = 1.0;
      }
    } else {
      // first-order leftover (odd low-pass order)
      s.a1 = -p.real();
      s.a2 = 0.0;
      s.b0 = 1.0; s.b1 = 1.0; s.b2 = 0.0;
    }
    f.sections_.push_back(s);
  }

  cplx h(1.0, 0.0);
  for (const auto& s : f.sections_) h *= section_response(s, ref_omega);
  const double scale = 1.0 / std::abs(h);
  auto& first = f.sections_.front();
  first.b0 *= scale;
  first.b1 *= scale;
  first.b2 *= scale;
  return f;
}

Vector SosFilter::apply(const Vector& x, std::optional<double> x0) const {
  const auto n = static_cast<std::size_t>(sections_.size());
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  if (x0) {
    double carry = *x0;  // steady-state input seen by each section
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = sections_[k];
      const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
      const double y = g * carry;
      s2[k] = s.b2 * carry - s.a2 * y;
      s1[k] = s.b1 * carry - s.a1 * y + s2[k];
      carry = y;
    }
  }
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double v = x(i);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = sections_[k];
      const double out = s.b0 * v + s1[k];
      s1[k] = s.b1 * v - s.a1 * out + s2[k];
      s2[k] = s.b2 * v - s.a2 * out;
      v = out;
    }
    y(i) = v;
  }
  return y;
}

Vector SosFilter::apply_zero_phase(const Vector& x) const {
  const Eigen::Index pad = 3 * order_;
  const Eigen::Index n = x.size();
  if (n <= pad) {
    throw Error(ErrorCode::SignalTooShort, "signal of " + std::to_string(n) +
                                                " samples is too short for zero-phase filtering");
  }
  Vector ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext(i) = 2.0 * x(0) - x(pad - i);
    ext(n + pad + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(pad, n) = x;

  Vector fwd = apply(ext, ext(0));
  Vector rev = fwd.reverse();
  Vector back = apply(rev, rev(0));
  return back.reverse().segment(pad, n);
}

double SosFilter::magnitude(double freq_hz, double fs) const {
  const double omega = 2.0 * kPi * freq_hz / fs;
  cplx h(1.0, 0.0);
  for (const auto& s : sections_) h *= section_response(s, omega);
  return std::abs(h);
}

Vector butterworth_zero_phase(const Vector& signal, double fs, const FilterSpec& spec) {
  const auto filter = SosFilter::butterworth(spec, fs);
  if (!spec.zero_phase) return filter.apply(signal);
  return filter.apply_zero_phase(signal);
}

Vector activation_envelope(const Vector& bandpassed, double fs, const EnvelopeConfig& cfg) {
  Vector rect = bandpassed.cwiseAbs();
  Vector env = butterworth_zero_phase(rect, fs, FilterSpec::lowpass(cfg.order, cfg.cutoff_hz));
  return env.cwiseMax(0.0);
}

double activation_shaping(double u, double shape_a) noexcept {
  if (std::abs(shape_a) < 1e-12) return u;
  return std::expm1(shape_a * u) / std::expm1(shape_a);
}

Vector muscle_activation(const Vector& e, const ActivationParams& p) {
  // z^2 + c1 z + c2 has both roots inside the unit circle iff
  // |c2| < 1 and |c1| < 1 + c2.
  if (!(std::abs(p.c2) < 1.0 && std::abs(p.c1) < 1.0 + p.c2)) {
    throw Error(ErrorCode::UnstableFilter, "activation recursion poles outside the unit circle");
  }
  if (p.delay < 0) throw Error(ErrorCode::InvalidArgument, "negative activation delay");
  const double gain = p.resolved_gain();
  Vector a(e.size());
  double u1 = 0.0, u2 = 0.0;
  for (Eigen::Index t = 0; t < e.size(); ++t) {
    const Eigen::Index src = t - p.delay;
    const double drive = src >= 0 ? e(src) : 0.0;
    const double u = gain * drive - p.c1 * u1 - p.c2 * u2;
    u2 = u1;
    u1 = u;
    a(t) = std::clamp(activation_shaping(u, p.shape_a), 0.0, 1.0);
  }
  return a;
}

FilterSpec emg_bandpass(const PreprocessConfig& cfg, double fs) {
  const double ceiling = 0.9 * 0.5 * fs;
  return FilterSpec::bandpass(cfg.bandpass_order, cfg.bandpass_low_hz,
                              std::min(cfg.bandpass_high_hz, ceiling));
}

Matrix session_bandpassed(const EmgRecording& emg, const PreprocessConfig& cfg) {
  const auto filter = SosFilter::butterworth(emg_bandpass(cfg, emg.sample_rate), emg.sample_rate);
  Matrix out(emg.muscles(), emg.samples());
  for (Eigen::Index c = 0; c < emg.muscles(); ++c) {
    out.row(c) = filter.apply_zero_phase(emg.channels.row(c).transpose()).transpose();
  }
  return out;
}

Matrix session_activation(const EmgRecording& emg, const PreprocessConfig& cfg) {
  const Matrix bp = session_bandpassed(emg, cfg);
  const auto lp = SosFilter::butterworth(
      FilterSpec::lowpass(cfg.envelope.order, cfg.envelope.cutoff_hz), emg.sample_rate);
  const auto first_window = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::floor(cfg.window_s * emg.sample_rate)), 1, emg.samples());

  Matrix act(emg.muscles(), emg.samples());
  for (Eigen::Index c = 0; c < emg.muscles(); ++c) {
    Vector env = lp.apply_zero_phase(bp.row(c).transpose().cwiseAbs()).cwiseMax(0.0);
    const Vector head = env.head(first_window);
    const double ref = percentile(std::span<const double>(head.data(), head.size()),
                                  cfg.normalization_percentile);
    if (ref > 0.0) {
      env = (env / ref).cwiseMin(1.0);
    } else {
      env.setZero();
    }
    act.row(c) = muscle_activation(env, cfg.activation).transpose();
  }
  return act;
}

std::vector<WindowSpan> window_stream(double duration_s, double emg_rate, double imu_rate,
                                      double window_s, double step_s) {
  if (window_s < kMinWindowSeconds) {
    throw Error(ErrorCode::WindowTooShort, "window must be at least 2 s");
  }
  if (!(step_s > 0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  std::vector<WindowSpan> out;
  constexpr double kEps = 1e-9;
  for (std::size_t k = 0;; ++k) {
    const double t0 = static_cast<double>(k) * step_s;
    const double t1 = t0 + window_s;
    if (t1 > duration_s + kEps) break;
    WindowSpan w;
    w.t_start = t0;
    w.t_end = t1;
    w.emg_begin = static_cast<Eigen::Index>(std::llround(t0 * emg_rate));
    w.emg_end = static_cast<Eigen::Index>(std::llround(t1 * emg_rate));
    w.imu_begin = static_cast<Eigen::Index>(std::llround(t0 * imu_rate));
    w.imu_end = static_cast<Eigen::Index>(std::llround(t1 * imu_rate));
    out.push_back(w);
  }
  return out;
}

std::vector<WindowSpan> window_stream(const SessionData& session, double window_s, double step_s) {
  auto spans = window_stream(session.duration(), session.emg.sample_rate, session.imu.sample_rate,
                             window_s, step_s);
  for (auto& w : spans) {
    w.emg_end = std::min(w.emg_end, session.emg.samples());
    w.imu_end = std::min(w.imu_end, session.imu.samples());
  }
  return spans;
}

Vector imu_features(const Matrix& shank, const Matrix& thigh) {
  if (shank.cols() == 0 || thigh.cols() == 0) throw Error(ErrorCode::EmptyWindow, "empty IMU window");
  if (shank.rows() != 6 || thigh.rows() != 6) {
    throw Error(ErrorCode::ShapeMismatch, "IMU windows must have 6 rows per segment");
  }
  Vector out(kExerciseDim);
  Eigen::Index slot = 0;
  for (const Matrix* seg : {&shank, &thigh}) {
    for (Eigen::Index ch = 0; ch < 6; ++ch) {
      const auto row = seg->row(ch);
      const double n = static_cast<double>(row.size());
      const double mu = row.mean();
      const double var = std::max(0.0, (row.array() - mu).square().sum() / n);
      const double rms = std::sqrt(row.squaredNorm() / n);
      double wl = 0.0;
      for (Eigen::Index i = 1; i < row.size(); ++i) wl += std::abs(row(i) - row(i - 1));
      out(slot++) = mu;
      out(slot++) = std::sqrt(var);
      out(slot++) = rms;
      out(slot++) = wl;
    }
  }
  return out;
}

Vector hudgins_features(const Matrix& w, double deadband_frac) {
  if (w.cols() == 0 || w.rows() == 0) throw Error(ErrorCode::EmptyWindow, "empty EMG window");
  Vector out(4 * w.rows());
  const double n = static_cast<double>(w.cols());
  for (Eigen::Index c = 0; c < w.rows(); ++c) {
    const auto x = w.row(c);
    const double mu = x.mean();
    const double sd = std::sqrt(std::max(0.0, (x.array() - mu).square().sum() / n));
    const double eps = deadband_frac * sd;
    double zc = 0.0, ssc = 0.0, wl = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double d = x(i + 1) - x(i);
      wl += std::abs(d);
      if (x(i) * x(i + 1) < 0.0 && std::abs(d) >= eps) zc += 1.0;
    }
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
      const double l = x(i) - x(i - 1);
      const double r = x(i) - x(i + 1);
      if (l * r > 0.0 && (std::abs(l) >= eps || std::abs(r) >= eps)) ssc += 1.0;
    }
    out(4 * c + 0) = x.cwiseAbs().mean();
    out(4 * c + 1) = zc;
    out(4 * c + 2) = ssc;
    out(4 * c + 3) = wl;
  }
  return out;
}

}  // namespace mfatigue
