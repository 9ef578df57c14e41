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

// Online Bayesian Gaussian-process fatigue estimator.
//
// The latent state f has a GP prior with linear mean beta^T x and a
// squared-exponential kernel over exercise vectors x. Each window's
// observation (W_t, I_t) enters through a probit likelihood whose argument
// is sgm(W) sgm(I) (f - m(x)) / sigma_n^2; we read that expression as the
// probit argument rather than as a probability. The posterior is kept
// Gaussian by a fixed-size (T) recursive Laplace update of the coefficient
// vector alpha and the matrix C, driven by the first and second
// derivatives (gamma1, gamma2) of the log evidence.

#include <cstdint>
#include <vector>

#include "mfatigue/datamodel.hpp"
#include "mfatigue/error.hpp"

namespace mfatigue {

struct TrainableParams {
  Vector beta;    // linear-mean weights
  Vector d_diag;  // kernel diagonal, >= 0
  double sigma_n2 = 1.0;

  /// beta = 0, d = 1, sigma_n^2 = 1.
  static TrainableParams defaults(Eigen::Index dim = kExerciseDim);
  Eigen::Index dim() const { return beta.size(); }
};

struct EstimatorConfig {
  int buffer_size = 50;     // T
  int probit_exponent = 2;  // power of sigma_x in the score denominator
  bool normalize_x = true;  // z-score exercise vectors per session
  int normalizer_windows = 10;
};

/// Ring buffer of the last T exercise vectors, newest first.
class ExerciseBuffer {
 public:
  explicit ExerciseBuffer(int capacity = 50);

  int capacity() const { return capacity_; }
  int filled() const { return filled_; }
  void push(const Vector& x);
  /// lag 0 is the most recent vector. Throws on an unfilled slot.
  const Vector& at(int lag) const;
  Vector mean() const;

 private:
  std::vector<Vector> slots_;
  int capacity_ = 0;
  int head_ = 0;  // slot of the most recent vector
  int filled_ = 0;
};

struct GpState {
  Vector alpha;  // T
  Matrix c_mat;  // T x T, symmetric
  ExerciseBuffer buffer;
  std::int64_t t_seen = 0;

  int active() const { return buffer.filled(); }
};

struct Posterior {
  double mu = 0.0;
  double sigma_x = 1.0;
};

struct Gammas {
  double g1 = 0.0;
  double g2 = 0.0;
};

/// Thrown when the recursion produces a non-finite value; carries the state
/// as it was before the failing update.
class NumericalFailureError : public Error {
 public:
  NumericalFailureError(const std::string& message, GpState snapshot)
      : Error(ErrorCode::NumericalFailure, message), snapshot_(std::move(snapshot)) {}
  const GpState& snapshot() const { return snapshot_; }

 private:
  GpState snapshot_;
};

/// exp(-(x - x')^T D (x - x')).
double kernel(const Vector& x, const Vector& xp, const Vector& d_diag);
double mean_fn(const Vector& x, const Vector& beta);

/// sgm(W) sgm(I) (f - beta^T x) / sigma_n^2.
double observation_factor(double w, double i, double f, const Vector& x, const TrainableParams& p);

/// log Phi(z), z = sgm(W) sgm(I) (mu - beta^T x) / sigma_x.
double log_evidence(double w, double i, const Vector& x, double mu, double sigma_x,
                    const TrainableParams& p);

/// First and second derivatives of log_evidence with respect to mu.
Gammas gammas(double w, double i, const Vector& x, double mu, double sigma_x,
              const TrainableParams& p);

/// F = Phi(sgm(W) sgm(I) (mu - beta^T x) / sigma_x^e), e = probit_exponent.
double fatigue_score(const Posterior& post, double w, double i, const Vector& x,
                     const TrainableParams& p, int probit_exponent = 2);

/// alpha ~ U(0, 0.2), C = diag(U(0, 2)), empty buffer.
GpState init_state(std::uint64_t seed, int buffer_size = 50);

struct UpdateResult {
  Posterior posterior;
  Gammas gammas;
};

/// One recursive step for the window with exercise vector x and
/// observations (W, I). The gammas are evaluated at the predictive
/// posterior (alpha_{t-1}, C_{t-1}); the returned posterior uses the
/// updated (alpha_t, C_t). During warm-up only the filled prefix of the
/// buffer (and the matching leading block of alpha and C) is used.
UpdateResult laplace_update(GpState& state, const Vector& x, double w, double i,
                            const TrainableParams& p);

/// Per-session z-scoring of exercise vectors, fitted on the first windows
/// and frozen, then divided by sqrt(dim) so E|x - x'|^2 is about 2.
struct ExerciseNormalizer {
  Vector mean;
  Vector scale;

  static ExerciseNormalizer fit(const std::vector<FeatureSample>& features, int windows);
  Vector apply(const Vector& x) const;
};

/// Features after exercise-vector normalization; reused across repeated
/// runs (training, restarts).
struct PreparedSession {
  std::vector<double> t_s;
  std::vector<double> w;
  std::vector<double> i;
  std::vector<Vector> x;

  std::size_t size() const { return t_s.size(); }
};

PreparedSession prepare_session(const std::vector<FeatureSample>& features,
                                const EstimatorConfig& cfg = {});

FatigueTrajectory run_prepared(const PreparedSession& session, const TrainableParams& p,
                               std::uint64_t seed, const EstimatorConfig& cfg = {});

/// Sequential update + score per window.
FatigueTrajectory run_session(const std::vector<FeatureSample>& features, const TrainableParams& p,
                              std::uint64_t seed, const EstimatorConfig& cfg = {});

}  // namespace mfatigue
