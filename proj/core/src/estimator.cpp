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

#include "mfatigue/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "mfatigue/numeric.hpp"

namespace mfatigue {

namespace {

// sigma_x^2 may not drop below this fraction of sigma_n^2 even when the
// C-correction makes k_t(x, x') negative.
constexpr double kVarianceFloor = 1e-6;

double open_unit(double f) {
  static const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(f, std::numeric_limits<double>::min(), hi);
}

void require_dims(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": dimension mismatch");
}

constexpr double kDowndateLimit = 1.0 - 1e-6;

double predictive_sigma(const GpState& s, int n, const Eigen::VectorXd& kx, const Eigen::VectorXd& kbar,
                        double k_self, double sigma_n2) {
  const double var = k_self + kx.dot(s.c_mat.topLeftCorner(n, n) * kbar);
  const double total = std::max(sigma_n2 + var, kVarianceFloor * sigma_n2);
  return std::sqrt(total);
}

}  // namespace

TrainableParams TrainableParams::defaults(Eigen::Index dim) {
  TrainableParams p;
  p.beta = Vector::Zero(dim);
  p.d_diag = Vector::Ones(dim);
  p.sigma_n2 = 1.0;
  return p;
}

ExerciseBuffer::ExerciseBuffer(int capacity) : slots_(static_cast<std::size_t>(capacity)), capacity_(capacity) {
  if (capacity < 1) throw Error(ErrorCode::InvalidArgument, "buffer capacity must be >= 1");
}

void ExerciseBuffer::push(const Vector& x) {
  head_ = (head_ + capacity_ - 1) % capacity_;
  slots_[static_cast<std::size_t>(head_)] = x;
  filled_ = std::min(filled_ + 1, capacity_);
}

const Vector& ExerciseBuffer::at(int lag) const {
  if (lag < 0 || lag >= filled_) {
    throw Error(ErrorCode::InvalidArgument, "buffer lag " + std::to_string(lag) + " is not filled");
  }
  return slots_[static_cast<std::size_t>((head_ + lag) % capacity_)];
}

Vector ExerciseBuffer::mean() const {
  if (filled_ == 0) throw Error(ErrorCode::EmptyInput, "mean of empty buffer");
  Vector m = Vector::Zero(at(0).size());
  for (int l = 0; l < filled_; ++l) m += at(l);
  return m / static_cast<double>(filled_);
}

double kernel(const Vector& x, const Vector& xp, const Vector& d_diag) {
  require_dims(x, xp, "kernel");
  require_dims(x, d_diag, "kernel");
  return std::exp(-((x - xp).array().square() * d_diag.array()).sum());
}

double mean_fn(const Vector& x, const Vector& beta) {
  require_dims(x, beta, "mean_fn");
  return beta.dot(x);
}

double observation_factor(double w, double i, double f, const Vector& x, const TrainableParams& p) {
  return sigmoid(w) * sigmoid(i) * (f - mean_fn(x, p.beta)) / p.sigma_n2;
}

double log_evidence(double w, double i, const Vector& x, double mu, double sigma_x,
                    const TrainableParams& p) {
  const double z = sigmoid(w) * sigmoid(i) * (mu - mean_fn(x, p.beta)) / sigma_x;
  return log_normal_cdf(z);
}

Gammas gammas(double w, double i, const Vector& x, double mu, double sigma_x,
              const TrainableParams& p) {
  const double s = sigmoid(w) * sigmoid(i) / sigma_x;
  const double z = s * (mu - mean_fn(x, p.beta));
  const double r = inverse_mills(z);
  return {s * r, -s * s * r * (z + r)};
}

double fatigue_score(const Posterior& post, double w, double i, const Vector& x,
                     const TrainableParams& p, int probit_exponent) {
  const double denom = std::pow(post.sigma_x, probit_exponent);
  const double arg = sigmoid(w) * sigmoid(i) * (post.mu - mean_fn(x, p.beta)) / denom;
  return open_unit(normal_cdf(arg));
}

GpState init_state(std::uint64_t seed, int buffer_size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, 0.2);
  std::uniform_real_distribution<double> uc(0.0, 2.0);
  auto open = [&](auto& dist) {
    double v = dist(rng);
    while (v <= 0.0) v = dist(rng);
    return v;
  };
  GpState s{Vector(buffer_size), Matrix::Zero(buffer_size, buffer_size), ExerciseBuffer(buffer_size), 0};
  for (int j = 0; j < buffer_size; ++j) s.alpha(j) = open(ua);
  for (int j = 0; j < buffer_size; ++j) s.c_mat(j, j) = open(uc);
  return s;
}

UpdateResult laplace_update(GpState& state, const Vector& x, double w, double i,
                            const TrainableParams& p) {
  require_dims(x, p.beta, "laplace_update");
  const int n = state.active();
  UpdateResult out;

  if (n == 0) {
    // Nothing buffered: prior mean 0 and unit prior variance.
    out.posterior = {0.0, std::sqrt(p.sigma_n2 + 1.0)};
    state.buffer.push(x);
    ++state.t_seen;
    return out;
  }

  Vector kx(n), kbar(n), kt(n);
  const Vector xbar = state.buffer.mean();
  const Vector& prev = state.buffer.at(0);
  for (int j = 0; j < n; ++j) {
    const Vector& xj = state.buffer.at(j);
    kx(j) = kernel(xj, x, p.d_diag);
    kbar(j) = kernel(xj, xbar, p.d_diag);
    kt(j) = kernel(xj, prev, p.d_diag);
  }
  const double k_self = kernel(x, xbar, p.d_diag);

  auto alpha = state.alpha.head(n);
  const double mu_pred = alpha.dot(kx);
  const double sigma_pred = predictive_sigma(state, n, kx, kbar, k_self, p.sigma_n2);
  out.gammas = gammas(w, i, x, mu_pred, sigma_pred, p);

  const Vector ck = state.c_mat.topLeftCorner(n, n) * kt;
  Vector alpha_new = alpha + out.gammas.g1 * ck;
  // A rank-1 downdate of a PSD matrix stays PSD while 1 + g2 k'Ck >= 0.
  const double q = kt.dot(ck);
  const double g2 = q > 0.0 ? std::max(out.gammas.g2, -kDowndateLimit / q) : out.gammas.g2;
  Matrix c_new = state.c_mat.topLeftCorner(n, n) + g2 * ck * ck.transpose();
  c_new = 0.5 * (c_new + c_new.transpose()).eval();
  if (!alpha_new.allFinite() || !c_new.allFinite() || !std::isfinite(mu_pred)) {
    throw NumericalFailureError("non-finite value in Laplace update at t=" +
                                    std::to_string(state.t_seen),
                                state);
  }
  state.alpha.head(n) = alpha_new;
  state.c_mat.topLeftCorner(n, n) = c_new;

  out.posterior.mu = alpha_new.dot(kx);
  out.posterior.sigma_x = predictive_sigma(state, n, kx, kbar, k_self, p.sigma_n2);
  state.buffer.push(x);
  ++state.t_seen;
  return out;
}

ExerciseNormalizer ExerciseNormalizer::fit(const std::vector<FeatureSample>& features, int windows) {
  if (features.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit normalizer on no windows");
  const auto dim = features.front().x.size();
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(windows, 1)), 1, features.size());
  ExerciseNormalizer nz;
  nz.mean = Vector::Zero(dim);
  for (std::size_t j = 0; j < k; ++j) nz.mean += features[j].x;
  nz.mean /= static_cast<double>(k);
  Vector var = Vector::Zero(dim);
  for (std::size_t j = 0; j < k; ++j) var += (features[j].x - nz.mean).array().square().matrix();
  var /= static_cast<double>(k);
  nz.scale = var.cwiseSqrt();
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (!(nz.scale(d) > 1e-12)) nz.scale(d) = 1.0;
  }
  // Unit expected squared norm: kernel distances stay O(1) in any dimension.
  nz.scale *= std::sqrt(static_cast<double>(dim));
  return nz;
}

Vector ExerciseNormalizer::apply(const Vector& x) const {
  return ((x - mean).array() / scale.array()).matrix();
}

PreparedSession prepare_session(const std::vector<FeatureSample>& features, const EstimatorConfig& cfg) {
  PreparedSession s;
  if (features.empty()) return s;
  std::optional<ExerciseNormalizer> nz;
  if (cfg.normalize_x) nz = ExerciseNormalizer::fit(features, cfg.normalizer_windows);
  for (const auto& f : features) {
    s.t_s.push_back(f.t_s);
    s.w.push_back(f.w);
    s.i.push_back(f.i);
    s.x.push_back(nz ? nz->apply(f.x) : f.x);
  }
  return s;
}

FatigueTrajectory run_prepared(const PreparedSession& session, const TrainableParams& p,
                               std::uint64_t seed, const EstimatorConfig& cfg) {
  FatigueTrajectory traj;
  traj.samples.reserve(session.size());
  if (session.size() == 0) return traj;
  GpState state = init_state(seed, cfg.buffer_size);
  for (std::size_t t = 0; t < session.size(); ++t) {
    const auto res = laplace_update(state, session.x[t], session.w[t], session.i[t], p);
    const double f =
        fatigue_score(res.posterior, session.w[t], session.i[t], session.x[t], p, cfg.probit_exponent);
    traj.samples.push_back({session.t_s[t], f});
  }
  return traj;
}

FatigueTrajectory run_session(const std::vector<FeatureSample>& features, const TrainableParams& p,
                              std::uint64_t seed, const EstimatorConfig& cfg) {
  return run_prepared(prepare_session(features, cfg), p, seed, cfg);
}

}  // namespace mfatigue
