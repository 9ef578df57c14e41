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

#include "mfatigue/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <toml.hpp>

#include "mfatigue/error.hpp"

namespace mfatigue {

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

struct Field {
  std::string key;
  std::function<void(const toml::node&, const std::string&)> read;
  std::function<void(toml::table&)> write;
};

struct Section {
  std::string name;
  std::vector<Field> fields;
};

double as_double(const toml::node& n, const std::string& where) {
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
  config_error(where, "expected a number");
}

std::int64_t as_int(const toml::node& n, const std::string& where) {
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  config_error(where, "expected an integer");
}

std::string as_string(const toml::node& n, const std::string& where) {
  if (auto v = n.value_exact<std::string>()) return *v;
  config_error(where, "expected a string");
}

Field real(std::string key, double& ref) {
  return {key, [&ref](const toml::node& n, const std::string& w) { ref = as_double(n, w); },
          [&ref, key](toml::table& t) { t.insert_or_assign(key, ref); }};
}

Field integer(std::string key, int& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            const auto v = as_int(n, w);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
              config_error(w, "integer out of range");
            }
            ref = static_cast<int>(v);
          },
          [&ref, key](toml::table& t) { t.insert_or_assign(key, static_cast<std::int64_t>(ref)); }};
}

Field seed_field(std::string key, std::uint64_t& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            const auto v = as_int(n, w);
            if (v < 0) config_error(w, "seed must be non-negative");
            ref = static_cast<std::uint64_t>(v);
          },
          [&ref, key](toml::table& t) { t.insert_or_assign(key, static_cast<std::int64_t>(ref)); }};
}

Field boolean(std::string key, bool& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            if (auto v = n.value_exact<bool>()) {
              ref = *v;
            } else {
              config_error(w, "expected a boolean");
            }
          },
          [&ref, key](toml::table& t) { t.insert_or_assign(key, ref); }};
}

// Optional number: "auto" means unset.
Field optional_real(std::string key, std::optional<double>& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            if (n.is_string()) {
              if (as_string(n, w) != "auto") config_error(w, "expected a number or \"auto\"");
              ref.reset();
            } else {
              ref = as_double(n, w);
            }
          },
          [&ref, key](toml::table& t) {
            if (ref) {
              t.insert_or_assign(key, *ref);
            } else {
              t.insert_or_assign(key, "auto");
            }
          }};
}

template <typename E>
Field enumeration(std::string key, E& ref, E (*parse)(const std::string&), std::string (*print)(E)) {
  return {key,
          [&ref, parse](const toml::node& n, const std::string& w) {
            try {
              ref = parse(as_string(n, w));
            } catch (const Error& e) {
              config_error(w, e.what());
            }
          },
          [&ref, print, key](toml::table& t) { t.insert_or_assign(key, print(ref)); }};
}

Field real_list(std::string key, std::vector<double>& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            const auto* arr = n.as_array();
            if (!arr) config_error(w, "expected an array of numbers");
            ref.clear();
            for (const auto& e : *arr) ref.push_back(as_double(e, w));
          },
          [&ref, key](toml::table& t) {
            toml::array arr;
            for (double v : ref) arr.push_back(v);
            t.insert_or_assign(key, std::move(arr));
          }};
}

Field split_field(std::string key, std::array<double, 3>& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            const auto* arr = n.as_array();
            if (!arr || arr->size() != 3) config_error(w, "expected [train, val, test]");
            for (std::size_t k = 0; k < 3; ++k) ref[k] = as_double(*arr->get(k), w);
          },
          [&ref, key](toml::table& t) {
            toml::array arr;
            for (double v : ref) arr.push_back(v);
            t.insert_or_assign(key, std::move(arr));
          }};
}

// Rows are muscles, columns synergies.
Field matrix_field(std::string key, Matrix& ref) {
  return {key,
          [&ref](const toml::node& n, const std::string& w) {
            const auto* rows = n.as_array();
            if (!rows || rows->empty()) config_error(w, "expected a non-empty array of rows");
            std::vector<std::vector<double>> data;
            for (const auto& r : *rows) {
              const auto* row = r.as_array();
              if (!row) config_error(w, "expected an array of rows");
              data.emplace_back();
              for (const auto& e : *row) data.back().push_back(as_double(e, w));
              if (data.back().size() != data.front().size()) config_error(w, "ragged matrix");
            }
            ref.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.front().size()));
            for (std::size_t i = 0; i < data.size(); ++i) {
              for (std::size_t j = 0; j < data[i].size(); ++j) {
                ref(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
              }
            }
          },
          [&ref, key](toml::table& t) {
            toml::array rows;
            for (Eigen::Index i = 0; i < ref.rows(); ++i) {
              toml::array row;
              for (Eigen::Index j = 0; j < ref.cols(); ++j) row.push_back(ref(i, j));
              rows.push_back(std::move(row));
            }
            t.insert_or_assign(key, std::move(rows));
          }};
}

std::vector<Section> bindings(PipelineConfig& c) {
  auto& pre = c.features.preprocess;
  auto& syn = c.features.synergy;
  auto& tr = c.training;
  auto& met = c.metrics;
  auto& sy = c.synth;
  return {
      {"preprocess",
       {integer("bandpass_order", pre.bandpass_order), real("bandpass_low_hz", pre.bandpass_low_hz),
        real("bandpass_high_hz", pre.bandpass_high_hz), integer("envelope_order", pre.envelope.order),
        real("envelope_cutoff_hz", pre.envelope.cutoff_hz),
        real("normalization_percentile", pre.normalization_percentile),
        optional_real("activation_gain", pre.activation.gain), integer("activation_delay", pre.activation.delay),
        real("activation_c1", pre.activation.c1), real("activation_c2", pre.activation.c2),
        real("activation_shape_a", pre.activation.shape_a), real("window_s", pre.window_s),
        real("step_s", pre.step_s), real("welch_segment_s", c.welch.segment_s),
        real("welch_overlap", c.welch.overlap)}},
      {"synergy",
       {real("vaf_threshold", syn.vaf_threshold), integer("select_restarts", syn.select_restarts),
        integer("window_restarts", syn.window_restarts), real("nmf_tol", syn.nmf_tol),
        integer("nmf_max_iter", syn.nmf_max_iter), real("nmf_rate_hz", syn.nmf_rate_hz)}},
      {"spinal", {enumeration<Pooling>("pooling", c.features.pooling, pooling_from_string, to_string)}},
      {"estimator",
       {integer("buffer_size", c.estimator.buffer_size), integer("probit_exponent", c.estimator.probit_exponent),
        boolean("normalize_x", c.estimator.normalize_x),
        integer("normalizer_windows", c.estimator.normalizer_windows), real("d_init", c.init.d_init),
        real("sigma_n2", c.init.sigma_n2)}},
      {"training",
       {real("lr", tr.lr), integer("max_epochs", tr.max_epochs), optional_real("loss_delta", tr.loss_delta),
        integer("patience", tr.patience), real("tol", tr.tol), integer("plateau_count", tr.plateau_count),
        split_field("split", tr.split), real("fd_step", tr.fd_step), integer("restarts_test", tr.restarts_test),
        integer("batch_size", tr.batch_size), boolean("train_sigma", tr.train_sigma),
        real("adam_beta1", tr.adam_beta1), real("adam_beta2", tr.adam_beta2), real("adam_eps", tr.adam_eps),
        boolean("segment_mode", tr.segment_mode), integer("segments_per_session", tr.segments_per_session)}},
      {"metrics",
       {enumeration<WoMode>("wo_mode", met.wo_mode, wo_mode_from_string, to_string),
        enumeration<ToleranceMode>("tolerance", met.tolerance, tolerance_mode_from_string, to_string),
        real("ad_window_ms", met.ad.window_ms), real("ad_step_ms", met.ad.step_ms),
        real("ad_train_minutes", met.ad.train_minutes), real("ad_bin_s", met.ad.bin_s),
        real("ad_deadband_frac", met.ad.deadband_frac), real("ad_ridge", met.ad.ridge),
        real("gait_fraction", met.gait.fraction), real("gait_percentile", met.gait.percentile)}},
      {"synth",
       {integer("n_subjects", sy.n_subjects), integer("n_days", sy.n_days),
        integer("sessions_per_day", sy.sessions_per_day), real("session_minutes", sy.session_minutes),
        real("gait_period_s", sy.gait_period_s), matrix_field("base_synergies", sy.base_synergies),
        real_list("synergy_phases", sy.synergy_phases), real("fractionation_gain", sy.fractionation_gain),
        real("jitter_gain", sy.jitter_gain), real("drift_gain", sy.drift_gain), real("noise_std", sy.noise_std),
        seed_field("seed", sy.seed), real("emg_rate", sy.emg_rate), real("imu_rate", sy.imu_rate),
        real("foot_rate", sy.foot_rate), real("sf_interval_s", sy.sf_interval_s),
        real("channel_gain_min", sy.channel_gain_min), real("channel_gain_max", sy.channel_gain_max),
        integer("split_synergy", sy.split_synergy)}},
  };
}

}  // namespace

TrainableParams EstimatorInit::params(Eigen::Index dim) const {
  auto p = TrainableParams::defaults(dim);
  p.d_diag.setConstant(d_init);
  p.sigma_n2 = sigma_n2;
  return p;
}

PipelineConfig PipelineConfig::for_profile(const std::string& profile) {
  PipelineConfig c;
  c.synth = SynthConfig::profile(profile);
  return c;
}

PipelineConfig parse_config(const std::string& toml_text, PipelineConfig base) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw Error::parse_error(e.source().begin.line, std::string(e.description()));
  }
  auto sections = bindings(base);
  for (const auto& [name, node] : doc) {
    const std::string sname(name.str());
    auto sec = std::find_if(sections.begin(), sections.end(), [&](const Section& s) { return s.name == sname; });
    if (sec == sections.end()) config_error("[" + sname + "]", "unknown section");
    const auto* table = node.as_table();
    if (!table) config_error(sname, "expected a table");
    for (const auto& [key, value] : *table) {
      const std::string kname(key.str());
      auto f = std::find_if(sec->fields.begin(), sec->fields.end(),
                            [&](const Field& fld) { return fld.key == kname; });
      if (f == sec->fields.end()) config_error(sname + "." + kname, "unknown key");
      f->read(value, sname + "." + kname);
    }
  }
  base.synth.validate();
  if (base.init.d_init < 0 || !(base.init.sigma_n2 > 0)) config_error("estimator", "d_init >= 0 and sigma_n2 > 0 required");
  if (base.estimator.buffer_size < 1) config_error("estimator.buffer_size", "must be >= 1");
  if (base.training.batch_size < 1 || base.training.max_epochs < 1) {
    config_error("training", "batch_size and max_epochs must be >= 1");
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string to_toml(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  toml::table doc;
  for (auto& sec : bindings(copy)) {
    toml::table t;
    for (auto& f : sec.fields) f.write(t);
    doc.insert_or_assign(sec.name, std::move(t));
  }
  std::ostringstream os;
  os << doc << '\n';
  return os.str();
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_toml(cfg);
}

}  // namespace mfatigue
