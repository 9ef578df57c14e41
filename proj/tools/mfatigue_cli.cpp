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

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mfatigue/config.hpp"
#include "mfatigue/error.hpp"
#include "mfatigue/numeric.hpp"
#include "mfatigue/study.hpp"

namespace fs = std::filesystem;
using namespace mfatigue;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::string profile = "default";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

PipelineConfig resolve_config(const Common& c) {
  auto cfg = PipelineConfig::for_profile(c.profile);
  if (!c.config_path.empty()) cfg = load_config(c.config_path, cfg);
  if (c.seed) cfg.synth.seed = *c.seed;
  return cfg;
}

std::uint64_t run_seed(const Common& c, const PipelineConfig& cfg) { return c.seed.value_or(cfg.synth.seed); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

// Resolved configuration next to an output file or inside an output directory.
void log_config(const PipelineConfig& cfg, const fs::path& out, bool is_dir) {
  const fs::path dir = is_dir ? out : (out.has_parent_path() ? out.parent_path() : fs::path("."));
  save_config(cfg, dir / "config.resolved.toml");
}

std::vector<fs::path> find_feature_files(const fs::path& root) {
  if (!fs::exists(root)) throw Error(ErrorCode::Io, "no such directory " + root.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "features.csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::EmptyDataset, "no features.csv under " + root.string());
  return files;
}

void add_common(CLI::App* app, Common& c, bool with_profile = true) {
  app->add_option("--config", c.config_path, "TOML pipeline configuration")->check(CLI::ExistingFile);
  if (with_profile) {
    app->add_option("--profile", c.profile, "Synthetic study scale")->check(CLI::IsMember({"fast", "default", "paper"}));
  }
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

int cmd_synth(const Common& c, const fs::path& out) {
  const auto cfg = resolve_config(c);
  const auto entries = generate_study(cfg.synth, out);
  log_config(cfg, out, true);
  std::cout << "wrote " << entries.size() << " sessions to " << out.string() << "\n";
  return 0;
}

int cmd_preprocess(const Common& c, const fs::path& session_dir, std::optional<double> window, const fs::path& out) {
  auto cfg = resolve_config(c);
  if (window) cfg.features.preprocess.window_s = cfg.features.preprocess.step_s = *window;
  const auto session = load_session(session_dir);
  const auto& pre = cfg.features.preprocess;
  std::vector<FeatureSample> rows;
  for (const auto& span : window_stream(session, pre.window_s, pre.step_s)) {
    const auto len = span.imu_end - span.imu_begin;
    FeatureSample f;
    f.t_s = span.t_end;
    f.x = imu_features(session.imu.shank.middleCols(span.imu_begin, len),
                       session.imu.thigh.middleCols(span.imu_begin, len));
    rows.push_back(std::move(f));
  }
  save_features(rows, out);
  log_config(cfg, out, false);
  return 0;
}

int cmd_features(const Common& c, const fs::path& session_dir, std::optional<double> window,
                 const std::string& baseline, const fs::path& out) {
  auto cfg = resolve_config(c);
  if (window) cfg.features.preprocess.window_s = cfg.features.preprocess.step_s = *window;
  const auto session = load_session(session_dir);
  std::vector<FeatureSample> rows;
  if (baseline == "rmsmdf") {
    rows = baseline_feature_samples(session, cfg.features.preprocess, cfg.welch);
  } else {
    const auto seed = derive_seed(run_seed(c, cfg), {0xFEA7u, static_cast<std::uint64_t>(session.session_index)});
    rows = extract_features(session, cfg.features, seed);
  }
  save_features(rows, out);
  log_config(cfg, out, false);
  return 0;
}

int cmd_train(const Common& c, const fs::path& data, const fs::path& out, const fs::path& log_path) {
  auto cfg = resolve_config(c);
  const auto files = find_feature_files(data);
  std::vector<PreparedSession> prepared;
  for (const auto& f : files) prepared.push_back(prepare_session(load_features(f), cfg.estimator));
  const auto seed = run_seed(c, cfg);
  DatasetSplit split;
  std::vector<PreparedSession> pool = prepared;
  try {
    split = split_dataset(prepared.size(), cfg.training.split, derive_seed(seed, {0x5917u}));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotEnoughForSplit || !cfg.training.segment_mode) throw;
    pool = segment_sessions(prepared, cfg.training.segments_per_session);
    split = split_dataset(pool.size(), cfg.training.split, derive_seed(seed, {0x5917u}));
  }
  const auto dim = pool.front().x.empty() ? Eigen::Index{kExerciseDim} : pool.front().x.front().size();
  TrainConfig tc = cfg.training;
  tc.jobs = c.jobs;
  const auto result = train(pool, split, tc, cfg.estimator, derive_seed(seed, {0x7A1u}), cfg.init.params(dim));
  save_params({result.params, cfg.estimator}, out);
  if (!log_path.empty()) save_train_log(result.log, log_path);
  log_config(cfg, out, false);
  std::cout << "stop: " << result.log.stop_reason << " after " << result.log.epochs.size() << " epochs\n";
  return 0;
}

int cmd_score(const Common& c, const fs::path& features, const fs::path& params_path, int restarts,
              const fs::path& spread_path, const fs::path& out) {
  const auto params = load_params(params_path);
  const auto prepared = prepare_session(load_features(features), params.estimator);
  const auto seed = c.seed.value_or(7);
  const auto summary = evaluate_with_restarts(params.params, prepared, restarts, seed, params.estimator);
  save_trajectory(summary.mean, out);
  if (!spread_path.empty()) {
    FatigueTrajectory spread;
    for (std::size_t k = 0; k < summary.spread.size(); ++k) {
      spread.samples.push_back({summary.mean.samples[k].t_s, summary.spread[k]});
    }
    save_trajectory(spread, spread_path);
  }
  return 0;
}

int cmd_eval(const Common& c, const fs::path& traj_path, const fs::path& session_dir, const fs::path& other_path,
             const fs::path& out) {
  const auto cfg = resolve_config(c);
  const auto traj = load_trajectory(traj_path);
  std::optional<FatigueTrajectory> other;
  if (!other_path.empty()) other = load_trajectory(other_path);
  std::optional<SessionData> session;
  std::optional<ADTrajectory> ad;
  if (!session_dir.empty()) {
    session = load_session(session_dir);
    try {
      ad = accuracy_degradation(*session, cfg.metrics.ad, cfg.features.preprocess, cfg.metrics.gait);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooShort) throw;
      std::cerr << "note: session too short for accuracy degradation\n";
    }
  }
  ReportInputs in;
  in.f = &traj;
  in.f_other_day = other ? &*other : nullptr;
  in.ad = ad ? &*ad : nullptr;
  if (session) {
    in.sf = session->sf.entries.empty() ? nullptr : &session->sf;
    in.ground_truth = session->ground_truth ? &*session->ground_truth : nullptr;
  }
  save_report(full_report(in, cfg.metrics), out);
  return 0;
}

int cmd_pipeline(const Common& c, const fs::path& out, bool write_sessions, const std::string& baseline) {
  const auto cfg = resolve_config(c);
  const auto seed = run_seed(c, cfg);
  DatasetOptions opts;
  opts.jobs = c.jobs;
  opts.source = baseline == "rmsmdf" ? FeatureSource::Baseline : FeatureSource::Synergy;
  if (write_sessions) opts.write_dir = out / "sessions";
  const auto data = build_dataset(cfg, opts);
  const auto outcome = run_study(data, cfg, seed, c.jobs);

  fs::create_directories(out / "trajectories");
  fs::create_directories(out / "reports");
  log_config(cfg, out, true);
  save_params({outcome.training.params, cfg.estimator}, out / "params.json");
  save_train_log(outcome.training.log, out / "train_log.csv");
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto label = session_label(data[k].entry);
    std::string flat = label;
    std::replace(flat.begin(), flat.end(), '/', '_');
    save_trajectory(outcome.scored[k], out / "trajectories" / (flat + ".csv"));
  }
  for (const auto& so : outcome.test) {
    std::string flat = session_label(data[so.index].entry);
    std::replace(flat.begin(), flat.end(), '/', '_');
    save_report(so.report, out / "reports" / (flat + ".json"));
  }
  write_text(out / "report.json", study_report_json(data, outcome));
  const auto& sm = outcome.summary;
  std::cout << "test sessions " << sm.n_test << ": WO " << sm.wo_literal << " (three-way " << sm.wo_three_way
            << "), Tr(GT,F) " << sm.tr_ground_truth << ", Tr(SF,F) " << sm.tr_sf;
  if (sm.tr_days) std::cout << ", Tr(D1,D2) " << *sm.tr_days;
  std::cout << "\nreport: " << (out / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Muscle-fatigue estimation from EMG synergies and spike-timing variability"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic study");
  std::string synth_out;
  add_common(synth, common);
  synth->add_option("--out", synth_out, "Output directory")->required();

  auto* pre = app.add_subcommand("preprocess", "Window a session and emit exercise vectors");
  std::string pre_session, pre_out;
  std::optional<double> pre_window;
  add_common(pre, common, false);
  pre->add_option("--session", pre_session, "Session directory")->required();
  pre->add_option("--window", pre_window, "Window length in seconds");
  pre->add_option("--out", pre_out, "Output CSV")->required();

  auto* feat = app.add_subcommand("features", "Extract per-window W, I and exercise vectors");
  std::string feat_session, feat_out, feat_baseline;
  std::optional<double> feat_window;
  add_common(feat, common, false);
  feat->add_option("--session", feat_session, "Session directory")->required();
  feat->add_option("--window", feat_window, "Window length in seconds");
  feat->add_option("--baseline", feat_baseline, "Replace W, I by a baseline")->check(CLI::IsMember({"rmsmdf"}));
  feat->add_option("--out", feat_out, "Output CSV")->required();

  auto* tr = app.add_subcommand("train", "Train estimator parameters");
  std::string tr_data, tr_out, tr_log;
  add_common(tr, common, false);
  tr->add_option("--data", tr_data, "Directory searched for features.csv files")->required();
  tr->add_option("--out", tr_out, "params.json path")->required();
  tr->add_option("--log", tr_log, "Per-epoch training log CSV");

  auto* sc = app.add_subcommand("score", "Score a session with trained parameters");
  std::string sc_features, sc_params, sc_out, sc_spread;
  int sc_restarts = 1;
  add_common(sc, common, false);
  sc->add_option("--features", sc_features, "features.csv")->required();
  sc->add_option("--params", sc_params, "params.json")->required();
  sc->add_option("--restarts", sc_restarts, "Random state restarts to average")->check(CLI::PositiveNumber);
  sc->add_option("--spread", sc_spread, "Per-window restart std CSV");
  sc->add_option("--out", sc_out, "Trajectory CSV")->required();

  auto* ev = app.add_subcommand("eval", "Compute WO, Tr and S for a trajectory");
  std::string ev_traj, ev_session, ev_other, ev_out;
  add_common(ev, common, false);
  ev->add_option("--traj", ev_traj, "Trajectory CSV")->required();
  ev->add_option("--session", ev_session, "Session directory (SF, ground truth, AD)");
  ev->add_option("--traj-other-day", ev_other, "Same-subject trajectory from another day");
  ev->add_option("--out", ev_out, "report.json")->required();

  auto* pl = app.add_subcommand("pipeline", "synth, features, train, score and eval in one run");
  std::string pl_out = "study";
  std::string pl_baseline;
  bool pl_write = false;
  add_common(pl, common);
  pl->add_option("--out", pl_out, "Output directory");
  pl->add_flag("--write-sessions", pl_write, "Also write raw session data and features");
  pl->add_option("--baseline", pl_baseline, "Replace W, I by a baseline")->check(CLI::IsMember({"rmsmdf"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(common, synth_out);
    if (*pre) return cmd_preprocess(common, pre_session, pre_window, pre_out);
    if (*feat) return cmd_features(common, feat_session, feat_window, feat_baseline, feat_out);
    if (*tr) return cmd_train(common, tr_data, tr_out, tr_log);
    if (*sc) return cmd_score(common, sc_features, sc_params, sc_restarts, sc_spread, sc_out);
    if (*ev) return cmd_eval(common, ev_traj, ev_session, ev_other, ev_out);
    if (*pl) return cmd_pipeline(common, pl_out, pl_write, pl_baseline);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::NumericalFailure) return kExitNumerical;
    return is_data_error(e.code()) ? kExitData : kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
