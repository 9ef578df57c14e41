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

// Self-supervised training of the estimator's mean weights and kernel
// diagonal with the weak-monotonicity pair loss.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfatigue/estimator.hpp"

namespace mfatigue {

/// Index pairs (p1, p2) with p1 > p2, all on one session's time axis.
struct PairBatch {
  std::vector<std::pair<int, int>> pairs;
};

struct TrainConfig {
  double lr = 0.1;
  int max_epochs = 1000;
  std::optional<double> loss_delta;  // unset: 1 / (N_windows - 1) per session
  int patience = 3;
  double tol = 0.001;
  int plateau_count = 3;
  std::array<double, 3> split{0.7, 0.1, 0.2};
  double fd_step = 1e-4;
  int restarts_test = 100;
  int batch_size = 100;
  bool train_sigma = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool segment_mode = false;
  int segments_per_session = 10;
  int jobs = 1;  // threads for the gradient; not part of the result
};

/// ReLU((F1 - F2 - (p1-p2) delta)^2 - ((p1-p2) delta)^2) + (1-F1)^2 + (1-F2)^2.
double pair_loss(double f1, double f2, int p1, int p2, double delta);

/// Tolerance so that a full 0 -> 1 rise over the session stays inside the band.
double default_loss_delta(std::size_t session_len);

/// Uniform sample without replacement over all pairs of a session.
PairBatch sample_pairs(int session_len, int batch_size, std::uint64_t seed);

/// Sum of pair losses of a batch over one trajectory's values.
double batch_loss(const std::vector<double>& f, const PairBatch& batch, double delta);

/// Parameter vector layout: beta, then d_diag, then sigma_n^2 if trained.
Vector pack_params(const TrainableParams& p, bool with_sigma);
TrainableParams unpack_params(const Vector& theta, Eigen::Index dim, double sigma_n2, bool with_sigma);

/// Central finite differences, g_i = (f(t + h e_i) - f(t - h e_i)) / 2h.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& theta, double h,
                   int jobs = 1);

/// One (session, batch) term of the training objective.
struct BatchTerm {
  const PreparedSession* session = nullptr;
  PairBatch batch;
  double delta = 0.0;
  std::uint64_t init_seed = 0;
};

/// Batch loss for the given parameters; reruns the GP recursion.
double term_loss(const TrainableParams& p, const BatchTerm& term, const EstimatorConfig& est);

/// FD gradient of the summed loss of `terms` with respect to beta, d_diag
/// (and sigma_n^2 when `with_sigma`). Every perturbation reuses the same
/// state-init seed. Throws NumericalFailure on a non-finite loss.
Vector loss_gradient(const TrainableParams& p, const std::vector<BatchTerm>& terms, double fd_step,
                     const EstimatorConfig& est, bool with_sigma = false, int jobs = 1);

struct AdamState {
  Vector m;
  Vector v;
  int t = 0;
};

/// Bias-corrected Adam on the packed vector; d_diag is projected onto >= 0
/// afterwards and sigma_n^2 is untouched unless `with_sigma`.
void adam_step(TrainableParams& p, const Vector& grad, AdamState& state, const TrainConfig& cfg,
               bool with_sigma = false);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Session-level split. Throws EmptyDataset for no sessions and
/// NotEnoughForSplit when validation or test would be empty.
DatasetSplit split_dataset(std::size_t n_sessions, const std::array<double, 3>& ratios,
                           std::uint64_t seed);

/// Cuts each session into `segments` contiguous pieces; used by segment mode
/// when there are too few sessions to split.
std::vector<PreparedSession> segment_sessions(const std::vector<PreparedSession>& sessions,
                                              int segments);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  int batch_size = 0;
  int steps = 0;
  double train_loss = 0.0;  // mean per-pair loss before each step
  double val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::string stop_reason;  // plateau | max_epochs | early_stop
  int best_epoch = 0;
};

struct TrainResult {
  TrainableParams params;
  TrainLog log;
};

/// Adam over per-session pair batches with plateau, epoch-cap and
/// validation-patience stopping. Returns the best-validation parameters.
TrainResult train(const std::vector<PreparedSession>& sessions, const DatasetSplit& split,
                  const TrainConfig& cfg, const EstimatorConfig& est, std::uint64_t seed,
                  std::optional<TrainableParams> initial = std::nullopt);

/// Mean pair loss over a fixed seeded pair set per session.
double validation_loss(const TrainableParams& p, const std::vector<PreparedSession>& sessions,
                       const std::vector<std::size_t>& indices, const TrainConfig& cfg,
                       const EstimatorConfig& est, std::uint64_t seed);

struct RestartSummary {
  FatigueTrajectory mean;
  std::vector<double> spread;  // per-window std across restarts
};

RestartSummary evaluate_with_restarts(const TrainableParams& p, const PreparedSession& session, int n,
                                      std::uint64_t base_seed, const EstimatorConfig& est = {});

void save_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace mfatigue
