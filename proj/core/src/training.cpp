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

#include "mfatigue/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "mfatigue/numeric.hpp"
#include "mfatigue/parallel.hpp"

namespace mfatigue {

namespace {

std::pair<int, int> decode_pair(std::uint64_t idx) {
  // idx = p1 (p1 - 1) / 2 + p2, 0 <= p2 < p1
  auto p1 = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
  while (p1 * (p1 - 1) / 2 > idx) --p1;
  while ((p1 + 1) * p1 / 2 <= idx) ++p1;
  return {static_cast<int>(p1), static_cast<int>(idx - p1 * (p1 - 1) / 2)};
}

double session_delta(const TrainConfig& cfg, std::size_t len) {
  return cfg.loss_delta.value_or(default_loss_delta(len));
}

}  // namespace

double pair_loss(double f1, double f2, int p1, int p2, double delta) {
  if (p1 <= p2) throw Error(ErrorCode::InvalidPair, "pair requires p1 > p2");
  const double band = static_cast<double>(p1 - p2) * delta;
  const double dev = f1 - f2 - band;
  const double mono = std::max(0.0, dev * dev - band * band);
  return mono + (1.0 - f1) * (1.0 - f1) + (1.0 - f2) * (1.0 - f2);
}

double default_loss_delta(std::size_t session_len) {
  return session_len > 1 ? 1.0 / static_cast<double>(session_len - 1) : 1.0;
}

PairBatch sample_pairs(int session_len, int batch_size, std::uint64_t seed) {
  if (session_len < 2) throw Error(ErrorCode::TooShort, "need at least 2 windows to form a pair");
  const auto n = static_cast<std::uint64_t>(session_len);
  const std::uint64_t total = n * (n - 1) / 2;
  PairBatch batch;
  std::vector<std::uint64_t> chosen;
  if (batch_size <= 0 || static_cast<std::uint64_t>(batch_size) >= total) {
    chosen.resize(total);
    std::iota(chosen.begin(), chosen.end(), 0);
  } else {
    // Floyd's algorithm: k distinct draws from [0, total)
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> picked;
    const auto k = static_cast<std::uint64_t>(batch_size);
    for (std::uint64_t j = total - k; j < total; ++j) {
      std::uniform_int_distribution<std::uint64_t> d(0, j);
      const auto r = d(rng);
      if (!picked.insert(r).second) picked.insert(j);
    }
    chosen.assign(picked.begin(), picked.end());
    std::sort(chosen.begin(), chosen.end());
  }
  batch.pairs.reserve(chosen.size());
  for (auto idx : chosen) batch.pairs.push_back(decode_pair(idx));
  return batch;
}

double batch_loss(const std::vector<double>& f, const PairBatch& batch, double delta) {
  double total = 0.0;
  for (const auto& [p1, p2] : batch.pairs) {
    total += pair_loss(f.at(static_cast<std::size_t>(p1)), f.at(static_cast<std::size_t>(p2)), p1, p2, delta);
  }
  return total;
}

Vector pack_params(const TrainableParams& p, bool with_sigma) {
  const auto d = p.dim();
  Vector theta(2 * d + (with_sigma ? 1 : 0));
  theta.head(d) = p.beta;
  theta.segment(d, d) = p.d_diag;
  if (with_sigma) theta(2 * d) = p.sigma_n2;
  return theta;
}

TrainableParams unpack_params(const Vector& theta, Eigen::Index dim, double sigma_n2, bool with_sigma) {
  TrainableParams p;
  p.beta = theta.head(dim);
  p.d_diag = theta.segment(dim, dim);
  p.sigma_n2 = with_sigma ? theta(2 * dim) : sigma_n2;
  return p;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& theta, double h, int jobs) {
  if (!(h > 0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  Vector g(theta.size());
  parallel_for(static_cast<std::size_t>(theta.size()), jobs, [&](std::size_t idx) {
    const auto k = static_cast<Eigen::Index>(idx);
    Vector probe = theta;
    probe(k) = theta(k) + h;
    const double up = f(probe);
    probe(k) = theta(k) - h;
    const double down = f(probe);
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NumericalFailure, "non-finite loss at parameter " + std::to_string(k));
    }
    g(k) = (up - down) / (2.0 * h);
  });
  return g;
}

double term_loss(const TrainableParams& p, const BatchTerm& term, const EstimatorConfig& est) {
  const auto traj = run_prepared(*term.session, p, term.init_seed, est);
  return batch_loss(traj.values(), term.batch, term.delta);
}

Vector loss_gradient(const TrainableParams& p, const std::vector<BatchTerm>& terms, double fd_step,
                     const EstimatorConfig& est, bool with_sigma, int jobs) {
  const auto dim = p.dim();
  const double sigma = p.sigma_n2;
  auto objective = [&](const Vector& theta) {
    const auto q = unpack_params(theta, dim, sigma, with_sigma);
    double total = 0.0;
    for (const auto& t : terms) total += term_loss(q, t, est);
    return total;
  };
  return fd_gradient(objective, pack_params(p, with_sigma), fd_step, jobs);
}

void adam_step(TrainableParams& p, const Vector& grad, AdamState& s, const TrainConfig& cfg,
               bool with_sigma) {
  Vector theta = pack_params(p, with_sigma);
  if (grad.size() != theta.size()) throw Error(ErrorCode::ShapeMismatch, "gradient size mismatch");
  if (s.m.size() != theta.size()) {
    s.m = Vector::Zero(theta.size());
    s.v = Vector::Zero(theta.size());
    s.t = 0;
  }
  ++s.t;
  s.m = cfg.adam_beta1 * s.m + (1.0 - cfg.adam_beta1) * grad;
  s.v = cfg.adam_beta2 * s.v + (1.0 - cfg.adam_beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, s.t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, s.t);
  const Vector m_hat = s.m / c1;
  const Vector v_hat = s.v / c2;
  theta.array() -= cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.adam_eps);

  const auto dim = p.dim();
  p = unpack_params(theta, dim, p.sigma_n2, with_sigma);
  p.d_diag = p.d_diag.cwiseMax(0.0);
  if (with_sigma) p.sigma_n2 = std::max(p.sigma_n2, 1e-6);
}

DatasetSplit split_dataset(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "no sessions to split");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    throw Error(ErrorCode::ConfigError, "split ratios must be non-negative and sum to 1");
  }
  const auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(n)));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw Error(ErrorCode::NotEnoughForSplit,
                std::to_string(n) + " sessions cannot be split " + "(enable segment mode)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
               order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

std::vector<PreparedSession> segment_sessions(const std::vector<PreparedSession>& sessions, int segments) {
  std::vector<PreparedSession> out;
  for (const auto& s : sessions) {
    const auto n = s.size();
    const auto k = static_cast<std::size_t>(std::max(1, segments));
    for (std::size_t j = 0; j < k; ++j) {
      const auto lo = j * n / k;
      const auto hi = (j + 1) * n / k;
      if (hi - lo < 2) continue;
      PreparedSession seg;
      for (std::size_t t = lo; t < hi; ++t) {
        seg.t_s.push_back(s.t_s[t]);
        seg.w.push_back(s.w[t]);
        seg.i.push_back(s.i[t]);
        seg.x.push_back(s.x[t]);
      }
      out.push_back(std::move(seg));
    }
  }
  return out;
}

double validation_loss(const TrainableParams& p, const std::vector<PreparedSession>& sessions,
                       const std::vector<std::size_t>& indices, const TrainConfig& cfg,
                       const EstimatorConfig& est, std::uint64_t seed) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (auto idx : indices) {
    const auto& s = sessions.at(idx);
    if (s.size() < 2) continue;
    BatchTerm term{&s, sample_pairs(static_cast<int>(s.size()), cfg.batch_size, derive_seed(seed, {0x7A1u, idx})),
                   session_delta(cfg, s.size()), derive_seed(seed, {0x7A2u, idx})};
    total += term_loss(p, term, est);
    pairs += term.batch.pairs.size();
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

TrainResult train(const std::vector<PreparedSession>& sessions, const DatasetSplit& split,
                  const TrainConfig& cfg, const EstimatorConfig& est, std::uint64_t seed,
                  std::optional<TrainableParams> initial) {
  if (split.train.empty()) throw Error(ErrorCode::EmptyDataset, "no training sessions");
  const auto dim = sessions.at(split.train.front()).x.empty()
                       ? Eigen::Index{kExerciseDim}
                       : sessions.at(split.train.front()).x.front().size();
  TrainableParams params = initial.value_or(TrainableParams::defaults(dim));
  AdamState adam;
  TrainResult result;
  result.params = params;

  double best_val = std::numeric_limits<double>::infinity();
  double prev_train = std::numeric_limits<double>::quiet_NaN();
  int small_steps = 0;
  int stale = 0;
  std::mt19937_64 order_rng(derive_seed(seed, {0x0D3u}));
  std::vector<std::size_t> order = split.train;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto init_seed = derive_seed(seed, {0xE90u, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    int steps = 0;
    for (auto idx : order) {
      const auto& s = sessions.at(idx);
      if (s.size() < 2) continue;
      std::vector<BatchTerm> terms{{&s,
                                    sample_pairs(static_cast<int>(s.size()), cfg.batch_size,
                                                 derive_seed(seed, {0xBA7u, static_cast<std::uint64_t>(epoch), idx})),
                                    session_delta(cfg, s.size()), init_seed}};
      epoch_loss += term_loss(params, terms.front(), est);
      epoch_pairs += terms.front().batch.pairs.size();
      const Vector g = loss_gradient(params, terms, cfg.fd_step, est, cfg.train_sigma, cfg.jobs);
      adam_step(params, g, adam, cfg, cfg.train_sigma);
      ++steps;
    }
    const double train_loss = epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0;
    const double val_loss = split.val.empty()
                                ? train_loss
                                : validation_loss(params, sessions, split.val, cfg, est, seed);

    if (val_loss < best_val) {
      best_val = val_loss;
      result.params = params;
      result.log.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    result.log.epochs.push_back({epoch, cfg.lr, cfg.batch_size, steps, train_loss, val_loss, best_val});

    if (std::isfinite(prev_train) && prev_train - train_loss < cfg.tol) {
      ++small_steps;
    } else {
      small_steps = 0;
    }
    prev_train = train_loss;

    if (small_steps >= cfg.plateau_count) {
      result.log.stop_reason = "plateau";
      return result;
    }
    if (stale >= cfg.patience) {
      result.log.stop_reason = "early_stop";
      return result;
    }
  }
  result.log.stop_reason = "max_epochs";
  return result;
}

RestartSummary evaluate_with_restarts(const TrainableParams& p, const PreparedSession& session, int n,
                                      std::uint64_t base_seed, const EstimatorConfig& est) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one restart");
  const auto len = session.size();
  std::vector<double> sum(len, 0.0), sum2(len, 0.0);
  for (int r = 0; r < n; ++r) {
    const auto seed = n == 1 ? base_seed : derive_seed(base_seed, {static_cast<std::uint64_t>(r)});
    const auto traj = run_prepared(session, p, seed, est);
    for (std::size_t t = 0; t < len; ++t) {
      sum[t] += traj.samples[t].f;
      sum2[t] += traj.samples[t].f * traj.samples[t].f;
    }
  }
  RestartSummary out;
  out.spread.resize(len);
  for (std::size_t t = 0; t < len; ++t) {
    const double m = sum[t] / n;
    out.mean.samples.push_back({session.t_s[t], m});
    out.spread[t] = std::sqrt(std::max(0.0, sum2[t] / n - m * m));
  }
  return out;
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "epoch,lr,batch_size,steps,train_loss,val_loss,best_val_loss,stop_reason\n";
  out.precision(17);
  for (std::size_t k = 0; k < log.epochs.size(); ++k) {
    const auto& e = log.epochs[k];
    out << e.epoch << ',' << e.lr << ',' << e.batch_size << ',' << e.steps << ',' << e.train_loss << ','
        << e.val_loss << ',' << e.best_val_loss << ','
        << (k + 1 == log.epochs.size() ? log.stop_reason : "") << '\n';
  }
}

}  // namespace mfatigue
