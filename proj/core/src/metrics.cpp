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

#include "mfatigue/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Cholesky>

#include "mfatigue/error.hpp"

namespace mfatigue {

namespace {

double median_spacing(std::span<const double> t) {
  if (t.size() < 2) return 0.0;
  std::vector<double> d;
  for (std::size_t k = 1; k < t.size(); ++k) d.push_back(t[k] - t[k - 1]);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

// Natural cubic interpolating spline; reproduces constants and lines exactly.
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Tridiagonal system for second derivatives, m_0 = m_{n-1} = 0.
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      a[i] = h0;
      b[i] = 2.0 * (h0 + h1);
      c[i] = h1;
      r[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
      if (i == 1) break;
    }
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    t = std::clamp(t, x_.front(), x_.back());
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i >= n - 1) i = n - 2;
    const double h = x_[i + 1] - x_[i];
    const double u = (x_[i + 1] - t) / h;
    const double v = (t - x_[i]) / h;
    return u * y_[i] + v * y_[i + 1] +
           ((u * u * u - u) * m_[i] + (v * v * v - v) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

std::optional<double> tr_value(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || a.size() != b.size()) return std::nullopt;
  return trendability(a, b).value;  // degenerate input reads as 0
}

}  // namespace

WoMode wo_mode_from_string(const std::string& s) {
  if (s == "literal") return WoMode::Literal;
  if (s == "three_way") return WoMode::ThreeWay;
  throw Error(ErrorCode::ConfigError, "unknown WO mode '" + s + "'");
}

ToleranceMode tolerance_mode_from_string(const std::string& s) {
  if (s == "global_std") return ToleranceMode::GlobalStd;
  if (s == "running_std") return ToleranceMode::RunningStd;
  throw Error(ErrorCode::ConfigError, "unknown tolerance mode '" + s + "'");
}

std::string to_string(WoMode m) { return m == WoMode::Literal ? "literal" : "three_way"; }
std::string to_string(ToleranceMode m) {
  return m == ToleranceMode::GlobalStd ? "global_std" : "running_std";
}

WoCounts weak_monotonicity_counts(std::span<const double> j, WoMode mode, ToleranceMode tol) {
  if (j.size() < 2) throw Error(ErrorCode::TooShort, "weak monotonicity needs N >= 2");
  const double global = population_std(j);
  WoCounts out;
  for (std::size_t t = 1; t < j.size(); ++t) {
    const double delta = tol == ToleranceMode::GlobalStd ? global : population_std(j.first(t));
    if (j[t] > j[t - 1] + delta) {
      ++out.plus;
    } else if (mode == WoMode::Literal || j[t] < j[t - 1] - delta) {
      ++out.minus;
    }
  }
  out.wo = static_cast<double>(out.plus - out.minus) / static_cast<double>(j.size() - 1);
  return out;
}

double weak_monotonicity(std::span<const double> j, WoMode mode, ToleranceMode tol) {
  return weak_monotonicity_counts(j, mode, tol).wo;
}

Correlation trendability(std::span<const double> a, std::span<const double> b) { return pearson(a, b); }

double suitability(double wo1, double wo2, double tr) noexcept { return (wo1 + wo2) * tr; }

std::vector<double> resample_to(const FatigueTrajectory& traj, std::span<const double> targets) {
  if (traj.empty()) throw Error(ErrorCode::EmptyInput, "cannot resample an empty trajectory");
  const auto times = traj.times();
  const auto values = traj.values();
  const NaturalSpline spline(times, values);
  std::vector<double> out(targets.size());

  const bool sparser = targets.size() >= 2 && median_spacing(targets) > median_spacing(times) &&
                       times.size() >= 2;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double t = targets[k];
    if (!sparser) {
      out[k] = spline(t);
      continue;
    }
    const double left = k > 0 ? 0.5 * (t - targets[k - 1]) : 0.5 * (targets[1] - targets[0]);
    const double right =
        k + 1 < targets.size() ? 0.5 * (targets[k + 1] - t) : 0.5 * (t - targets[k - 1]);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= t - left && times[i] < t + right) {
        sum += values[i];
        ++count;
      }
    }
    out[k] = count ? sum / count : spline(t);
  }
  return out;
}

GaitPhase classify_contact(bool heel_on, bool meta_on) noexcept {
  if (heel_on && meta_on) return GaitPhase::Midstance;
  if (heel_on) return GaitPhase::InitialContact;
  if (meta_on) return GaitPhase::Propulsion;
  return GaitPhase::Swing;
}

GaitPhaseLabels gait_phase_labels(const FootPressureRecording& foot, const GaitThresholds& th) {
  GaitPhaseLabels out;
  out.sample_rate = foot.sample_rate;
  const auto n = foot.samples();
  if (n == 0) return out;
  const double heel_th =
      th.fraction * percentile(std::span<const double>(foot.heel.data(), n), th.percentile);
  const double meta_th =
      th.fraction * percentile(std::span<const double>(foot.metatarsal.data(), n), th.percentile);
  out.labels.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    const bool heel = foot.heel(s) >= heel_th && heel_th > 0.0;
    const bool meta = foot.metatarsal(s) >= meta_th && meta_th > 0.0;
    out.labels.push_back(classify_contact(heel, meta));
  }
  return out;
}

void LinearDiscriminant::fit(const Matrix& x, const std::vector<int>& labels, int classes, double ridge) {
  if (x.rows() != static_cast<Eigen::Index>(labels.size()) || x.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "LDA: features and labels differ in count");
  }
  const auto d = x.cols();
  center_ = x.colwise().mean().transpose();
  scale_ = ((x.rowwise() - center_.transpose()).array().square().colwise().mean()).sqrt().transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(scale_(k) > 1e-12)) scale_(k) = 1.0;
  }
  const Matrix z = ((x.rowwise() - center_.transpose()).array().rowwise() / scale_.transpose().array()).matrix();

  means_ = Matrix::Zero(classes, d);
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int c = labels[static_cast<std::size_t>(r)];
    means_.row(c) += z.row(r);
    counts[static_cast<std::size_t>(c)] += 1.0;
  }
  present_.assign(static_cast<std::size_t>(classes), false);
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      means_.row(c) /= counts[static_cast<std::size_t>(c)];
      present_[static_cast<std::size_t>(c)] = true;
    }
  }
  Matrix cov = Matrix::Zero(d, d);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const Vector dev = (z.row(r) - means_.row(labels[static_cast<std::size_t>(r)])).transpose();
    cov.noalias() += dev * dev.transpose();
  }
  const int k_present = static_cast<int>(std::count(present_.begin(), present_.end(), true));
  cov /= std::max<double>(1.0, static_cast<double>(z.rows() - k_present));
  const double lift = ridge * std::max(cov.trace() / static_cast<double>(d), 1e-12);
  cov.diagonal().array() += lift;
  const Eigen::LDLT<Matrix> solver(cov);

  weights_ = solver.solve(means_.transpose());  // d x classes
  bias_.resize(classes);
  const double total = static_cast<double>(z.rows());
  for (int c = 0; c < classes; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    bias_(c) = present_[cc] ? -0.5 * means_.row(c).dot(weights_.col(c)) + std::log(counts[cc] / total)
                            : -std::numeric_limits<double>::infinity();
  }
}

int LinearDiscriminant::predict(const Vector& x) const {
  const Vector z = ((x - center_).array() / scale_.array()).matrix();
  const Vector score = weights_.transpose() * z + bias_;
  Eigen::Index best = 0;
  score.maxCoeff(&best);
  return static_cast<int>(best);
}

ADTrajectory accuracy_degradation_from_features(const Matrix& features, const std::vector<int>& labels,
                                                const std::vector<double>& times, const AdConfig& cfg) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()) || labels.size() != times.size()) {
    throw Error(ErrorCode::ShapeMismatch, "AD: features, labels and times differ in count");
  }
  const double train_end = cfg.train_minutes * 60.0;
  std::vector<Eigen::Index> train_rows;
  for (std::size_t r = 0; r < times.size(); ++r) {
    if (times[r] <= train_end) train_rows.push_back(static_cast<Eigen::Index>(r));
  }
  if (train_rows.empty()) throw Error(ErrorCode::TooShort, "AD: no training windows");
  Matrix xtr(static_cast<Eigen::Index>(train_rows.size()), features.cols());
  std::vector<int> ytr;
  for (std::size_t k = 0; k < train_rows.size(); ++k) {
    xtr.row(static_cast<Eigen::Index>(k)) = features.row(train_rows[k]);
    ytr.push_back(labels[static_cast<std::size_t>(train_rows[k])]);
  }
  LinearDiscriminant lda;
  lda.fit(xtr, ytr, kGaitPhaseCount, cfg.ridge);

  ADTrajectory out;
  int correct = 0;
  for (std::size_t k = 0; k < train_rows.size(); ++k) {
    if (lda.predict(xtr.row(static_cast<Eigen::Index>(k)).transpose()) == ytr[k]) ++correct;
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_rows.size());

  const double t_last = times.empty() ? 0.0 : times.back();
  for (int b = 0;; ++b) {
    const double lo = train_end + b * cfg.bin_s;
    const double hi = lo + cfg.bin_s;
    if (lo >= t_last || (t_last - lo) < 0.5 * cfg.bin_s) break;
    int n = 0, ok = 0;
    bool missing = false;
    for (std::size_t r = 0; r < times.size(); ++r) {
      if (times[r] <= lo || times[r] > hi) continue;
      if (!lda.has_class(labels[r])) {
        missing = true;
        break;
      }
      ++n;
      if (lda.predict(features.row(static_cast<Eigen::Index>(r)).transpose()) == labels[r]) ++ok;
    }
    if (missing) {
      out.class_missing = true;
      continue;
    }
    if (n == 0) continue;
    const double acc = static_cast<double>(ok) / n;
    out.bin_accuracy.push_back(acc);
    out.points.push_back({0.5 * (lo + std::min(hi, t_last)), out.train_accuracy - acc});
  }
  return out;
}

ADTrajectory accuracy_degradation(const SessionData& session, const AdConfig& cfg,
                                  const PreprocessConfig& pre, const GaitThresholds& th) {
  if (session.duration() < cfg.train_minutes * 60.0 + 60.0) {
    throw Error(ErrorCode::TooShort, "accuracy degradation needs at least train period + 1 minute");
  }
  const Matrix bp = session_bandpassed(session.emg, pre);
  const auto phases = gait_phase_labels(session.foot, th);
  const double fs = session.emg.sample_rate;
  const auto len = static_cast<Eigen::Index>(std::llround(cfg.window_ms * 1e-3 * fs));
  const auto step = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(cfg.step_ms * 1e-3 * fs)));
  const Eigen::Index total = std::min<Eigen::Index>(
      session.emg.samples(), static_cast<Eigen::Index>(std::floor(session.duration() * fs)));

  std::vector<Vector> rows;
  std::vector<int> labels;
  std::vector<double> times;
  for (Eigen::Index start = 0; start + len <= total; start += step) {
    const double t0 = static_cast<double>(start) / fs;
    const double t1 = static_cast<double>(start + len) / fs;
    auto f0 = static_cast<std::size_t>(std::floor(t0 * phases.sample_rate));
    auto f1 = static_cast<std::size_t>(std::ceil(t1 * phases.sample_rate));
    f1 = std::min(f1, phases.labels.size());
    if (f0 >= f1) continue;
    std::array<int, kGaitPhaseCount> votes{};
    for (auto s = f0; s < f1; ++s) ++votes[static_cast<std::size_t>(phases.labels[s])];
    labels.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
    rows.push_back(hudgins_features(bp.middleCols(start, len), cfg.deadband_frac));
    times.push_back(t1);
  }
  Matrix feats(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) feats.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return accuracy_degradation_from_features(feats, labels, times, cfg);
}

std::vector<double> sf_fatigue_values(const SubjectiveTimeline& sf) {
  std::vector<double> out;
  for (const auto& e : sf.entries) out.push_back(8.0 - e.likert);
  return out;
}

MetricsReport full_report(const ReportInputs& in, const MetricsConfig& cfg) {
  if (!in.f) throw Error(ErrorCode::EmptyInput, "report needs a fatigue trajectory");
  MetricsReport rep;
  const auto f = in.f->values();
  const auto ft = in.f->times();
  for (const char* key : {"AD,F", "SF,F", "D1,D2", "GT,F"}) rep.tr[key] = std::nullopt;
  if (f.size() < 2) return rep;

  rep.wo = weak_monotonicity(f, WoMode::Literal, cfg.tolerance);
  rep.wo_three_way = weak_monotonicity(f, WoMode::ThreeWay, cfg.tolerance);

  if (in.sf && in.sf->entries.size() >= 2) {
    std::vector<double> t;
    for (const auto& e : in.sf->entries) t.push_back(e.t_s);
    rep.tr["SF,F"] = tr_value(sf_fatigue_values(*in.sf), resample_to(*in.f, t));
  }
  if (in.ad && in.ad->points.size() >= 2) {
    std::vector<double> t, v;
    for (const auto& p : in.ad->points) {
      t.push_back(p.t_s);
      v.push_back(p.drop);
    }
    rep.tr["AD,F"] = tr_value(v, resample_to(*in.f, t));
  }
  if (in.ground_truth && in.ground_truth->t_s.size() >= 2) {
    FatigueTrajectory gt;
    for (std::size_t k = 0; k < in.ground_truth->t_s.size(); ++k) {
      gt.samples.push_back({in.ground_truth->t_s[k], in.ground_truth->g[k]});
    }
    rep.tr["GT,F"] = tr_value(resample_to(gt, ft), f);
  }
  if (in.f_other_day && in.f_other_day->size() >= 2) {
    const auto other = resample_to(*in.f_other_day, ft);
    rep.tr["D1,D2"] = tr_value(f, other);
    if (rep.tr["D1,D2"]) {
      const double wo2 = weak_monotonicity(in.f_other_day->values(), cfg.wo_mode, cfg.tolerance);
      const double wo1 = weak_monotonicity(f, cfg.wo_mode, cfg.tolerance);
      rep.suitability = suitability(wo1, wo2, *rep.tr["D1,D2"]);
    }
  }
  return rep;
}

}  // namespace mfatigue
