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

#include "mfatigue/study.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/parallel.hpp"

namespace mfatigue {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : mean(v);
}

std::optional<double> mean_or_null(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

}  // namespace

std::uint64_t session_feature_seed(std::uint64_t seed, const StudyEntry& e) {
  return derive_seed(seed, {0xFEA7u, static_cast<std::uint64_t>(e.subject), static_cast<std::uint64_t>(e.day),
                            static_cast<std::uint64_t>(e.session)});
}

std::vector<SessionArtifacts> build_dataset(const PipelineConfig& cfg, const DatasetOptions& opts) {
  const auto& sy = cfg.synth;
  sy.validate();
  std::vector<SessionArtifacts> data;
  for (int s = 0; s < sy.n_subjects; ++s) {
    for (int d = 0; d < sy.n_days; ++d) {
      for (int k = 0; k < sy.sessions_per_day; ++k) {
        SessionArtifacts a;
        a.entry = {s, d, k, opts.write_dir ? *opts.write_dir / session_relative_dir(s, d, k)
                                           : session_relative_dir(s, d, k)};
        data.push_back(std::move(a));
      }
    }
  }
  parallel_for(data.size(), opts.jobs, [&](std::size_t idx) {
    auto& a = data[idx];
    const auto& e = a.entry;
    const SessionData session = generate_session(sy, e.subject, e.day, e.session);
    if (opts.source == FeatureSource::Synergy) {
      a.features = extract_features(session, cfg.features, session_feature_seed(sy.seed, e), &a.diagnostics);
    } else {
      a.features = baseline_feature_samples(session, cfg.features.preprocess, cfg.welch);
    }
    a.ground_truth = session.ground_truth.value_or(GroundTruthFatigue{});
    a.sf = session.sf;
    if (opts.compute_ad) {
      try {
        a.ad = accuracy_degradation(session, cfg.metrics.ad, cfg.features.preprocess, cfg.metrics.gait);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::TooShort) throw;
      }
    }
    if (opts.write_dir) {
      save_session(session, e.dir);
      save_features(a.features, e.dir / "features.csv");
    }
  });
  return data;
}

std::optional<std::size_t> other_day_partner(const std::vector<SessionArtifacts>& data, std::size_t k) {
  const auto& e = data.at(k).entry;
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto& o = data[j].entry;
    if (j == k || o.subject != e.subject || o.session != e.session || o.day == e.day) continue;
    // Prefer the next day, wrapping around.
    if (!best || ((o.day - e.day + 1000) % 1000) < ((data[*best].entry.day - e.day + 1000) % 1000)) best = j;
  }
  return best;
}

StudyOutcome run_study(const std::vector<SessionArtifacts>& data, const PipelineConfig& cfg, std::uint64_t seed,
                       int jobs) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no sessions");
  std::vector<PreparedSession> prepared(data.size());
  parallel_for(data.size(), jobs,
               [&](std::size_t k) { prepared[k] = prepare_session(data[k].features, cfg.estimator); });

  StudyOutcome out;
  out.split = split_dataset(data.size(), cfg.training.split, derive_seed(seed, {0x5917u}));
  const auto dim = prepared.front().x.empty() ? Eigen::Index{kExerciseDim} : prepared.front().x.front().size();
  TrainConfig tc = cfg.training;
  tc.jobs = jobs;
  out.training = train(prepared, out.split, tc, cfg.estimator, derive_seed(seed, {0x7A1u}), cfg.init.params(dim));

  std::vector<RestartSummary> scored(data.size());
  parallel_for(data.size(), jobs, [&](std::size_t k) {
    scored[k] = evaluate_with_restarts(out.training.params, prepared[k], cfg.training.restarts_test,
                                       derive_seed(seed, {0xE7A1u, static_cast<std::uint64_t>(k)}), cfg.estimator);
  });
  out.scored.reserve(data.size());
  for (const auto& s : scored) out.scored.push_back(s.mean);

  std::vector<double> wo, wo3, tr_gt, tr_sf, tr_ad, s_vals, spread;
  for (auto k : out.split.test) {
    SessionOutcome so;
    so.index = k;
    so.scored = scored[k];
    const auto partner = other_day_partner(data, k);
    ReportInputs in;
    in.f = &scored[k].mean;
    in.sf = data[k].sf.entries.empty() ? nullptr : &data[k].sf;
    in.ad = data[k].ad ? &*data[k].ad : nullptr;
    in.f_other_day = partner ? &scored[*partner].mean : nullptr;
    in.ground_truth = data[k].ground_truth.t_s.empty() ? nullptr : &data[k].ground_truth;
    so.report = full_report(in, cfg.metrics);
    const auto& r = so.report;
    if (r.wo) wo.push_back(*r.wo);
    if (r.wo_three_way) wo3.push_back(*r.wo_three_way);
    auto pick = [&](const char* key, std::vector<double>& dst) {
      auto it = r.tr.find(key);
      if (it != r.tr.end() && it->second) dst.push_back(*it->second);
    };
    pick("GT,F", tr_gt);
    pick("SF,F", tr_sf);
    pick("AD,F", tr_ad);
    if (r.suitability) s_vals.push_back(*r.suitability);
    for (double v : so.scored.spread) spread.push_back(v);
    out.test.push_back(std::move(so));
  }

  // Cross-day stability over every same-subject pair, each pair once.
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto partner = other_day_partner(data, k);
    if (!partner || data[*partner].entry.day < data[k].entry.day) continue;
    const auto& a = scored[k].mean;
    const auto& b = scored[*partner].mean;
    const auto b_on_a = resample_to(b, a.times());
    const auto av = a.values();
    out.day_pair_tr.push_back(trendability(av, b_on_a).value);
  }

  auto& sm = out.summary;
  sm.n_test = static_cast<int>(out.split.test.size());
  sm.wo_literal = mean_of(wo);
  sm.wo_three_way = mean_of(wo3);
  sm.tr_ground_truth = mean_of(tr_gt);
  sm.tr_sf = mean_of(tr_sf);
  sm.tr_ad = mean_or_null(tr_ad);
  sm.tr_days = mean_or_null(out.day_pair_tr);
  sm.n_day_pairs = static_cast<int>(out.day_pair_tr.size());
  sm.suitability = mean_or_null(s_vals);
  sm.mean_restart_std = mean_of(spread);
  return out;
}

std::string session_label(const StudyEntry& e) {
  return session_relative_dir(e.subject, e.day, e.session).generic_string();
}

std::string params_to_json(const ParamsFile& p) {
  ordered_json j;
  j["beta"] = std::vector<double>(p.params.beta.data(), p.params.beta.data() + p.params.beta.size());
  j["d_diag"] = std::vector<double>(p.params.d_diag.data(), p.params.d_diag.data() + p.params.d_diag.size());
  j["sigma_n2"] = p.params.sigma_n2;
  j["buffer_size"] = p.estimator.buffer_size;
  j["probit_exponent"] = p.estimator.probit_exponent;
  j["normalize_x"] = p.estimator.normalize_x;
  j["warmup_windows"] = p.estimator.normalizer_windows;
  return j.dump(2) + "\n";
}

void save_params(const ParamsFile& p, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << params_to_json(p);
}

ParamsFile load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open params " + path.string());
  ParamsFile p;
  try {
    const auto j = ordered_json::parse(in);
    const auto beta = j.at("beta").get<std::vector<double>>();
    const auto d = j.at("d_diag").get<std::vector<double>>();
    if (beta.size() != d.size() || beta.empty()) {
      throw Error(ErrorCode::ShapeMismatch, path.string() + ": beta and d_diag lengths differ");
    }
    p.params.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    p.params.d_diag = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
    p.params.sigma_n2 = j.at("sigma_n2").get<double>();
    p.estimator.buffer_size = j.value("buffer_size", p.estimator.buffer_size);
    p.estimator.probit_exponent = j.value("probit_exponent", p.estimator.probit_exponent);
    p.estimator.normalize_x = j.value("normalize_x", p.estimator.normalize_x);
    p.estimator.normalizer_windows = j.value("warmup_windows", p.estimator.normalizer_windows);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return p;
}

std::string study_report_json(const std::vector<SessionArtifacts>& data, const StudyOutcome& outcome) {
  const auto& sm = outcome.summary;
  ordered_json j;
  j["summary"] = {{"n_test", sm.n_test},
                  {"wo", sm.wo_literal},
                  {"wo_three_way", sm.wo_three_way},
                  {"tr_gt", sm.tr_ground_truth},
                  {"tr_sf", sm.tr_sf},
                  {"tr_ad", number_or_null(sm.tr_ad)},
                  {"tr_days", number_or_null(sm.tr_days)},
                  {"n_day_pairs", sm.n_day_pairs},
                  {"s", number_or_null(sm.suitability)},
                  {"mean_restart_std", sm.mean_restart_std}};
  ordered_json sessions = ordered_json::array();
  for (const auto& so : outcome.test) {
    ordered_json s = ordered_json::parse(report_to_json(so.report));
    ordered_json row;
    row["session"] = session_label(data.at(so.index).entry);
    for (auto& [k, v] : s.items()) row[k] = v;
    sessions.push_back(std::move(row));
  }
  j["test_sessions"] = std::move(sessions);
  const auto& log = outcome.training.log;
  j["training"] = {{"epochs", log.epochs.size()},
                   {"best_epoch", log.best_epoch},
                   {"stop_reason", log.stop_reason},
                   {"final_train_loss", log.epochs.empty() ? 0.0 : log.epochs.back().train_loss},
                   {"best_val_loss", log.epochs.empty() ? 0.0 : log.epochs.back().best_val_loss}};
  ordered_json split;
  auto labels = [&](const std::vector<std::size_t>& idx) {
    ordered_json a = ordered_json::array();
    for (auto k : idx) a.push_back(session_label(data.at(k).entry));
    return a;
  };
  split["train"] = labels(outcome.split.train);
  split["val"] = labels(outcome.split.val);
  split["test"] = labels(outcome.split.test);
  j["split"] = std::move(split);
  return j.dump(2) + "\n";
}

}  // namespace mfatigue
