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

#include "mfatigue/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/preprocess.hpp"

namespace mfatigue {

namespace {

// Gait-cycle phase boundaries, heel strike at 0.
constexpr double kInitialContactEnd = 0.10;
constexpr double kMidstanceEnd = 0.40;
constexpr double kPropulsionEnd = 0.60;

constexpr double kBumpHalfWidth = 0.06;    // of the cycle
constexpr double kBaseJitter = 0.01;       // cycle fraction, unfatigued
constexpr double kJitterScale = 0.15;      // added at g = 1, jitter_gain = 1
constexpr double kSplitPhaseShift = 0.30;  // timing of the split-off module
constexpr double kAmplitudeDrift = 0.5;
constexpr double kSpectralDrift = 0.6;

struct SubjectLatent {
  FatigueShape shape = FatigueShape::Linear;
  double g_end = 1.0;
  double period = 1.1;
  Matrix synergies;
  Matrix imu_amp;    // 12 x 3 harmonics
  Matrix imu_phase;  // 12 x 3
  Vector imu_offset;  // 12
  double heel_level = 1.0;
  double meta_level = 1.0;
};

double shape_value(FatigueShape shape, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  switch (shape) {
    case FatigueShape::Linear:
      return tau;
    case FatigueShape::ExponentialSaturating:
      return -std::expm1(-3.0 * tau) / -std::expm1(-3.0);
    case FatigueShape::Sigmoid: {
      const double lo = sigmoid(-5.0);
      const double hi = sigmoid(5.0);
      return (sigmoid(10.0 * (tau - 0.5)) - lo) / (hi - lo);
    }
  }
  return tau;
}

Matrix normalize_cols(Matrix v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    const double n = v.col(k).norm();
    if (n > 0) v.col(k) /= n;
  }
  return v;
}

SubjectLatent subject_latent(const SynthConfig& cfg, int subject) {
  std::mt19937_64 rng(derive_seed(cfg.seed, {0x5B1u, static_cast<std::uint64_t>(subject)}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SubjectLatent s;
  static constexpr FatigueShape kShapes[] = {FatigueShape::Linear, FatigueShape::ExponentialSaturating,
                                             FatigueShape::Sigmoid};
  s.shape = kShapes[subject % 3];
  s.g_end = 0.7 + 0.3 * u(rng);
  s.period = cfg.gait_period_s * (0.95 + 0.1 * u(rng));
  s.synergies = cfg.base_synergies;
  for (Eigen::Index i = 0; i < s.synergies.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.synergies.cols(); ++j) s.synergies(i, j) *= 0.85 + 0.3 * u(rng);
  }
  s.synergies = normalize_cols(s.synergies);
  s.imu_amp.resize(12, 3);
  s.imu_phase.resize(12, 3);
  s.imu_offset.resize(12);
  for (int ch = 0; ch < 12; ++ch) {
    const bool gyro = (ch % 6) < 3;
    const double scale = gyro ? 3.0 : 5.0;
    for (int h = 0; h < 3; ++h) {
      s.imu_amp(ch, h) = scale * (0.2 + 0.8 * u(rng)) / (h + 1);
      s.imu_phase(ch, h) = 2.0 * kPi * u(rng);
    }
    s.imu_offset(ch) = gyro ? 0.0 : ((ch % 6) == 5 ? 9.81 : 0.5 * (u(rng) - 0.5));
  }
  s.heel_level = 0.8 + 0.4 * u(rng);
  s.meta_level = 0.8 + 0.4 * u(rng);
  return s;
}

GaitPhase phase_at(double phi) {
  if (phi < kInitialContactEnd) return GaitPhase::InitialContact;
  if (phi < kMidstanceEnd) return GaitPhase::Midstance;
  if (phi < kPropulsionEnd) return GaitPhase::Propulsion;
  return GaitPhase::Swing;
}

// Unit-variance noise band-limited to [lo, hi] Hz (hi pulled under Nyquist).
Vector band_noise(Eigen::Index n, double fs, double lo, double hi, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = nd(rng);
  const double top = std::min(hi, 0.9 * 0.5 * fs);
  const auto filt = SosFilter::butterworth(FilterSpec::bandpass(4, lo, top), fs);
  Vector y = filt.apply(w);
  const double sd = std::sqrt(y.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(n, 1)));
  return sd > 0 ? Vector(y / sd) : y;
}

struct CycleClock {
  std::vector<double> starts;

  // Cycle index and phase in [0, 1) at time t.
  std::pair<std::size_t, double> locate(double t) const {
    auto it = std::upper_bound(starts.begin(), starts.end(), t);
    std::size_t k = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
    k = std::min(k, starts.size() - 2);
    const double phi = (t - starts[k]) / (starts[k + 1] - starts[k]);
    return {k, std::clamp(phi, 0.0, std::nextafter(1.0, 0.0))};
  }
};

}  // namespace

Matrix default_base_synergies() {
  // rows: RF VL VM TA SOL ST BF LG MG
  Matrix v(9, 4);
  v << 0.6, 0.0, 0.5, 0.0,
       1.0, 0.0, 0.0, 0.0,
       0.9, 0.0, 0.0, 0.0,
       0.0, 0.0, 1.0, 0.2,
       0.0, 1.0, 0.0, 0.0,
       0.1, 0.0, 0.0, 1.0,
       0.1, 0.0, 0.0, 0.9,
       0.0, 0.8, 0.0, 0.0,
       0.0, 0.9, 0.0, 0.1;
  return normalize_cols(v);
}

std::vector<double> default_synergy_phases() { return {0.05, 0.45, 0.70, 0.90}; }

SynthConfig SynthConfig::default_profile() {
  SynthConfig c;
  c.base_synergies = default_base_synergies();
  c.synergy_phases = default_synergy_phases();
  return c;
}

SynthConfig SynthConfig::fast_profile() {
  SynthConfig c = default_profile();
  c.n_subjects = 2;
  c.session_minutes = 3.0;
  c.emg_rate = 250.0;
  c.sf_interval_s = 30.0;
  return c;
}

SynthConfig SynthConfig::paper_profile() {
  SynthConfig c = default_profile();
  c.n_subjects = 10;
  c.session_minutes = 20.0;
  c.sf_interval_s = 300.0;
  return c;
}

SynthConfig SynthConfig::profile(const std::string& name) {
  if (name == "fast") return fast_profile();
  if (name == "default") return default_profile();
  if (name == "paper") return paper_profile();
  throw Error(ErrorCode::ConfigError, "unknown profile '" + name + "' (fast|default|paper)");
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "synth: " + m); };
  if (n_subjects < 1 || n_days < 1 || sessions_per_day < 1) fail("counts must be >= 1");
  if (!(session_minutes > 0) || !(gait_period_s > 0)) fail("durations must be positive");
  if (base_synergies.rows() < 2 || base_synergies.cols() < 1) fail("need >= 2 muscles and >= 1 synergy");
  if ((base_synergies.array() < 0).any()) fail("base synergies must be non-negative");
  for (Eigen::Index k = 0; k < base_synergies.cols(); ++k) {
    if (std::abs(base_synergies.col(k).norm() - 1.0) > 1e-9) fail("base synergy columns must be unit norm");
  }
  if (static_cast<Eigen::Index>(synergy_phases.size()) != base_synergies.cols()) {
    fail("one phase per base synergy required");
  }
  if (fractionation_gain < 0 || jitter_gain < 0 || drift_gain < 0 || noise_std < 0) fail("gains must be >= 0");
  if (!(emg_rate > 0 && imu_rate > 0 && foot_rate > 0)) fail("sample rates must be positive");
  if (!(sf_interval_s > 0)) fail("SF interval must be positive");
  if (split_synergy < 0 || split_synergy >= base_synergies.cols()) fail("split synergy index out of range");
  if (!(channel_gain_min > 0 && channel_gain_min <= channel_gain_max)) fail("bad channel gain range");
}

GroundTruthFatigue ground_truth_curve(const SynthConfig& cfg, int subject, double duration_s,
                                      double resolution_s) {
  const auto latent = subject_latent(cfg, subject);
  GroundTruthFatigue gt;
  gt.shape = latent.shape;
  const auto steps = static_cast<std::size_t>(std::floor(duration_s / resolution_s + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * resolution_s;
    gt.t_s.push_back(t);
    gt.g.push_back(latent.g_end * shape_value(latent.shape, t / duration_s));
  }
  return gt;
}

SessionDetail generate_session_detail(const SynthConfig& cfg, int subject, int day, int session_idx) {
  cfg.validate();
  const auto latent = subject_latent(cfg, subject);
  const double duration = cfg.session_minutes * 60.0;
  const auto fatigue = [&](double t) { return latent.g_end * shape_value(latent.shape, t / duration); };

  std::mt19937_64 rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(subject),
                                             static_cast<std::uint64_t>(day),
                                             static_cast<std::uint64_t>(session_idx)}));
  std::mt19937_64 day_rng(derive_seed(cfg.seed, {0xDA7u, static_cast<std::uint64_t>(subject),
                                                 static_cast<std::uint64_t>(day)}));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);

  const int m = cfg.muscles();
  const int n_base = static_cast<int>(cfg.base_synergies.cols());
  const int n_all = n_base + 1;  // + the module split off under fatigue

  SessionDetail out;
  out.channel_gain.resize(m);
  for (int i = 0; i < m; ++i) {
    out.channel_gain(i) = cfg.channel_gain_min + (cfg.channel_gain_max - cfg.channel_gain_min) * u01(day_rng);
  }

  // Gait cycles covering [0, duration].
  CycleClock clock;
  double s0 = -latent.period * u01(rng);
  clock.starts.push_back(s0);
  while (clock.starts.back() <= duration + latent.period) {
    clock.starts.push_back(clock.starts.back() + latent.period * (1.0 + 0.01 * nd(rng)));
  }
  const std::size_t cycles = clock.starts.size() - 1;

  // Module activation bumps with fatigue-dependent timing jitter.
  std::vector<double> phases = cfg.synergy_phases;
  phases.push_back(cfg.synergy_phases[static_cast<std::size_t>(cfg.split_synergy)] + kSplitPhaseShift);
  struct Bump {
    double center;
    double half_width;
    double amp;
  };
  std::vector<std::vector<Bump>> bumps(static_cast<std::size_t>(n_all));
  for (std::size_t k = 0; k < cycles; ++k) {
    const double start = clock.starts[k];
    const double p = clock.starts[k + 1] - start;
    const double sigma = kBaseJitter + kJitterScale * cfg.jitter_gain * fatigue(std::max(start, 0.0));
    for (int j = 0; j < n_all; ++j) {
      const double center = start + (phases[static_cast<std::size_t>(j)] + sigma * nd(rng)) * p;
      bumps[static_cast<std::size_t>(j)].push_back({center, kBumpHalfWidth * p, 1.0 + 0.05 * nd(rng)});
    }
  }

  const double fs = cfg.emg_rate;
  const auto n_emg = static_cast<Eigen::Index>(std::llround(duration * fs));
  Matrix coeff = Matrix::Zero(n_all, n_emg);
  for (int j = 0; j < n_all; ++j) {
    for (const auto& b : bumps[static_cast<std::size_t>(j)]) {
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil((b.center - b.half_width) * fs)));
      const auto hi = std::min<Eigen::Index>(n_emg - 1, static_cast<Eigen::Index>(std::floor((b.center + b.half_width) * fs)));
      for (Eigen::Index s = lo; s <= hi; ++s) {
        const double d = (static_cast<double>(s) / fs - b.center) / b.half_width;
        coeff(j, s) += b.amp * 0.5 * (1.0 + std::cos(kPi * d));
      }
    }
  }

  // Fractionation: the split synergy's muscles divide into two groups; the
  // second group migrates to the shifted module as g grows.
  const Vector v_split = latent.synergies.col(cfg.split_synergy);
  Vector group_a = Vector::Zero(m), group_b = Vector::Zero(m);
  {
    int seen = 0;
    for (int i = 0; i < m; ++i) {
      if (v_split(i) <= 0) continue;
      (seen++ % 2 == 0 ? group_a : group_b)(i) = v_split(i);
    }
    if (group_a.norm() > 0) group_a /= group_a.norm();
  }
  auto synergies_at = [&](double g) {
    const double a = std::min(1.0, cfg.fractionation_gain * g);
    Matrix v(m, n_all);
    v.leftCols(n_base) = latent.synergies;
    Vector col = (1.0 - a) * v_split + a * group_a;
    if (col.norm() > 0) col /= col.norm();
    v.col(cfg.split_synergy) = col;
    v.col(n_base) = a * group_b;  // not renormalized: grows in with g
    return v;
  };
  out.synergies_at_start = synergies_at(0.0);

  Vector fatigue_at_sample(n_emg);
  for (Eigen::Index s = 0; s < n_emg; ++s) fatigue_at_sample(s) = fatigue(static_cast<double>(s) / fs);

  out.activation.resize(m, n_emg);
  // V(t) changes slowly; refresh it every 50 ms.
  const auto block = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(0.05 * fs));
  for (Eigen::Index s0i = 0; s0i < n_emg; s0i += block) {
    const auto len = std::min(block, n_emg - s0i);
    const double g = fatigue_at_sample(s0i);
    const Matrix v = synergies_at(g);
    out.activation.middleCols(s0i, len) = v * coeff.middleCols(s0i, len);
  }
  for (Eigen::Index s = 0; s < n_emg; ++s) {
    const double drift = 1.0 + kAmplitudeDrift * cfg.drift_gain * fatigue_at_sample(s);
    out.activation.col(s) = (out.activation.col(s).array() * out.channel_gain.array() * drift).matrix();
  }

  // EMG: envelope-modulated band-limited carriers.
  SessionData& sd = out.session;
  sd.emg.sample_rate = fs;
  sd.emg.muscle_names = m == 9 ? default_muscle_names() : std::vector<std::string>{};
  if (sd.emg.muscle_names.empty()) {
    for (int i = 0; i < m; ++i) sd.emg.muscle_names.push_back("M" + std::to_string(i + 1));
  }
  sd.emg.channels.resize(m, n_emg);
  for (int i = 0; i < m; ++i) {
    const Vector hi = band_noise(n_emg, fs, 20.0, 450.0, rng);
    const Vector lo = band_noise(n_emg, fs, 20.0, 120.0, rng);
    for (Eigen::Index s = 0; s < n_emg; ++s) {
      const double w = std::min(0.8, kSpectralDrift * cfg.drift_gain * fatigue_at_sample(s));
      const double carrier = std::sqrt(1.0 - w) * hi(s) + std::sqrt(w) * lo(s);
      sd.emg.channels(i, s) = out.activation(i, s) * carrier + cfg.noise_std * nd(rng);
    }
  }

  // IMU: per-phase periodic templates.
  sd.imu.sample_rate = cfg.imu_rate;
  const auto n_imu = static_cast<Eigen::Index>(std::llround(duration * cfg.imu_rate));
  sd.imu.shank.resize(6, n_imu);
  sd.imu.thigh.resize(6, n_imu);
  for (Eigen::Index s = 0; s < n_imu; ++s) {
    const double phi = clock.locate(static_cast<double>(s) / cfg.imu_rate).second;
    for (int ch = 0; ch < 12; ++ch) {
      double v = latent.imu_offset(ch);
      for (int h = 0; h < 3; ++h) {
        v += latent.imu_amp(ch, h) * std::sin(2.0 * kPi * (h + 1) * phi + latent.imu_phase(ch, h));
      }
      v += 0.05 * nd(rng);
      (ch < 6 ? sd.imu.shank : sd.imu.thigh)(ch % 6, s) = v;
    }
  }

  // Foot pressure from the phase schedule.
  sd.foot.sample_rate = cfg.foot_rate;
  const auto n_foot = static_cast<Eigen::Index>(std::llround(duration * cfg.foot_rate));
  sd.foot.heel.resize(n_foot);
  sd.foot.metatarsal.resize(n_foot);
  out.phases.resize(static_cast<std::size_t>(n_foot));
  for (Eigen::Index s = 0; s < n_foot; ++s) {
    const auto phase = phase_at(clock.locate(static_cast<double>(s) / cfg.foot_rate).second);
    out.phases[static_cast<std::size_t>(s)] = phase;
    const bool heel = phase == GaitPhase::InitialContact || phase == GaitPhase::Midstance;
    const bool meta = phase == GaitPhase::Midstance || phase == GaitPhase::Propulsion;
    sd.foot.heel(s) = (heel ? latent.heel_level : 0.0) + 0.005 * std::abs(nd(rng));
    sd.foot.metatarsal(s) = (meta ? latent.meta_level : 0.0) + 0.005 * std::abs(nd(rng));
  }

  // Subjective rating, 7 = not exhausted and 1 = exhausted.
  for (double t = 0.0; t <= duration + 1e-9; t += cfg.sf_interval_s) {
    const double g = fatigue(t);
    sd.sf.entries.push_back({t, 8 - static_cast<int>(std::lround(1.0 + 6.0 * g))});
  }

  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%02d", subject + 1);
  sd.subject_id = buf;
  sd.day_id = "D" + std::to_string(day + 1);
  sd.session_index = session_idx;
  sd.ground_truth = ground_truth_curve(cfg, subject, duration);
  return out;
}

SessionData generate_session(const SynthConfig& cfg, int subject, int day, int session_idx) {
  return std::move(generate_session_detail(cfg, subject, day, session_idx).session);
}

std::filesystem::path session_relative_dir(int subject, int day, int session) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%02d", subject + 1);
  return std::filesystem::path(buf) / ("D" + std::to_string(day + 1)) / ("session" + std::to_string(session));
}

std::vector<StudyEntry> generate_study(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::vector<StudyEntry> entries;
  for (int s = 0; s < cfg.n_subjects; ++s) {
    for (int d = 0; d < cfg.n_days; ++d) {
      for (int k = 0; k < cfg.sessions_per_day; ++k) {
        const auto dir = out_dir / session_relative_dir(s, d, k);
        save_session(generate_session(cfg, s, d, k), dir);
        entries.push_back({s, d, k, dir});
      }
    }
  }
  return entries;
}

}  // namespace mfatigue
