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

#include "mfatigue/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "csv_io.hpp"
#include "mfatigue/error.hpp"

namespace mfatigue {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kImuColumns = {
    "shank_gx", "shank_gy", "shank_gz", "shank_ax", "shank_ay", "shank_az",
    "thigh_gx", "thigh_gy", "thigh_gz", "thigh_ax", "thigh_ay", "thigh_az"};

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::MissingStream, "missing stream file " + p.string());
}

void check_header(const detail::CsvTable& t, const std::vector<std::string>& expected,
                  const fs::path& p) {
  if (t.header != expected) throw Error::parse_error(1, "unexpected header in " + p.string());
}

// Rows are 0-based data rows, columns 0-based CSV columns (t is column 0).
void check_finite(const detail::CsvTable& t, const fs::path& p) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      if (!std::isfinite(t.rows[r][c])) throw Error::corrupt_sample(r, c, p.string());
    }
  }
}

Matrix columns_to_matrix(const detail::CsvTable& t, std::size_t first, std::size_t count) {
  Matrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < count; ++c) {
      m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = t.rows[r][first + c];
    }
  }
  return m;
}

void write_stream(const fs::path& path, const std::vector<std::string>& names, const Matrix& rows,
                  double rate) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), names.begin(), names.end());
  detail::CsvWriter w(path, header);
  std::vector<double> row(names.size() + 1);
  for (Eigen::Index s = 0; s < rows.cols(); ++s) {
    row[0] = static_cast<double>(s) / rate;
    for (Eigen::Index c = 0; c < rows.rows(); ++c) row[static_cast<std::size_t>(c) + 1] = rows(c, s);
    w.row(row);
  }
  w.close();
}

json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

const std::vector<std::string>& default_muscle_names() {
  static const std::vector<std::string> names = {"RF", "VL", "VM", "TA", "SOL",
                                                 "ST", "BF", "LG", "MG"};
  return names;
}

std::string to_string(FatigueShape shape) {
  switch (shape) {
    case FatigueShape::Linear: return "linear";
    case FatigueShape::ExponentialSaturating: return "exponential";
    case FatigueShape::Sigmoid: return "sigmoid";
  }
  return "linear";
}

FatigueShape fatigue_shape_from_string(const std::string& name) {
  if (name == "linear") return FatigueShape::Linear;
  if (name == "exponential") return FatigueShape::ExponentialSaturating;
  if (name == "sigmoid") return FatigueShape::Sigmoid;
  throw Error(ErrorCode::ConfigError, "unknown fatigue shape '" + name + "'");
}

double SessionData::duration() const {
  return std::min({emg.duration(), imu.duration(), foot.duration()});
}

std::vector<double> FatigueTrajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.t_s);
  return out;
}

std::vector<double> FatigueTrajectory::values() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.f);
  return out;
}

void validate_session(const SessionData& s) {
  if (s.emg.muscles() < 2) throw Error(ErrorCode::ShapeMismatch, "EMG needs at least 2 channels");
  if (!(s.emg.sample_rate > 0) || !(s.imu.sample_rate > 0) || !(s.foot.sample_rate > 0)) {
    throw Error(ErrorCode::InvalidArgument, "sample rates must be positive");
  }
  if (!s.emg.muscle_names.empty() &&
      static_cast<Eigen::Index>(s.emg.muscle_names.size()) != s.emg.muscles()) {
    throw Error(ErrorCode::ShapeMismatch, "muscle name count does not match EMG channels");
  }
  if (s.imu.shank.rows() != 6 || s.imu.thigh.rows() != 6 ||
      s.imu.shank.cols() != s.imu.thigh.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "IMU segments must both be 6 x N with equal N");
  }
  if (s.foot.heel.size() != s.foot.metatarsal.size()) {
    throw Error(ErrorCode::ShapeMismatch, "foot pressure channels differ in length");
  }
  if ((s.foot.heel.array() < 0).any() || (s.foot.metatarsal.array() < 0).any()) {
    throw Error(ErrorCode::InvalidArgument, "negative foot pressure sample");
  }
  if (!s.emg.channels.allFinite() || !s.imu.shank.allFinite() || !s.imu.thigh.allFinite() ||
      !s.foot.heel.allFinite() || !s.foot.metatarsal.allFinite()) {
    throw Error(ErrorCode::CorruptSample, "non-finite sample in session");
  }
  const double slow_period =
      1.0 / std::min({s.emg.sample_rate, s.imu.sample_rate, s.foot.sample_rate});
  const double longest = std::max({s.emg.duration(), s.imu.duration(), s.foot.duration()});
  const double shortest = std::min({s.emg.duration(), s.imu.duration(), s.foot.duration()});
  if (longest - shortest > slow_period + 1e-9) {
    throw Error(ErrorCode::DurationMismatch,
                "stream durations differ by " + std::to_string(longest - shortest) + " s");
  }
  double prev = -1.0;
  for (const auto& e : s.sf.entries) {
    if (e.t_s <= prev) throw Error(ErrorCode::InvalidArgument, "SF times not strictly increasing");
    if (e.likert < 1 || e.likert > 7) throw Error(ErrorCode::InvalidArgument, "Likert outside 1..7");
    prev = e.t_s;
  }
}

void validate_trajectory(const FatigueTrajectory& traj) {
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& p = traj.samples[k];
    if (!(p.f > 0.0 && p.f < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "fatigue score outside (0,1) at index " + std::to_string(k));
    }
    if (k > 0 && !(p.t_s > traj.samples[k - 1].t_s)) {
      throw Error(ErrorCode::InvalidArgument, "trajectory times not strictly increasing");
    }
  }
}

SessionData load_session(const fs::path& dir) {
  const auto meta_path = dir / "meta.json";
  for (const char* name : {"emg.csv", "imu.csv", "foot.csv", "sf.csv", "meta.json"}) {
    require_file(dir / name);
  }

  json meta;
  {
    std::ifstream in(meta_path);
    try {
      meta = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, meta_path.string() + ": " + e.what());
    }
  }

  SessionData s;
  try {
    s.subject_id = meta.at("subject_id").get<std::string>();
    s.day_id = meta.at("day_id").get<std::string>();
    s.session_index = meta.at("session_index").get<int>();
    const auto& rates = meta.at("sample_rates");
    s.emg.sample_rate = rates.at("emg").get<double>();
    s.imu.sample_rate = rates.at("imu").get<double>();
    s.foot.sample_rate = rates.at("foot").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, meta_path.string() + ": " + e.what());
  }

  {
    const auto p = dir / "emg.csv";
    auto t = detail::read_csv(p);
    if (t.header.size() < 3 || t.header.front() != "t") {
      throw Error::parse_error(1, "EMG header must start with t and list >= 2 muscles");
    }
    check_finite(t, p);
    s.emg.muscle_names.assign(t.header.begin() + 1, t.header.end());
    s.emg.channels = columns_to_matrix(t, 1, t.header.size() - 1);
  }
  {
    const auto p = dir / "imu.csv";
    auto t = detail::read_csv(p);
    std::vector<std::string> expected{"t"};
    expected.insert(expected.end(), kImuColumns.begin(), kImuColumns.end());
    check_header(t, expected, p);
    check_finite(t, p);
    s.imu.shank = columns_to_matrix(t, 1, 6);
    s.imu.thigh = columns_to_matrix(t, 7, 6);
  }
  {
    const auto p = dir / "foot.csv";
    auto t = detail::read_csv(p);
    check_header(t, {"t", "heel", "metatarsal"}, p);
    check_finite(t, p);
    Matrix m = columns_to_matrix(t, 1, 2);
    s.foot.heel = m.row(0).transpose();
    s.foot.metatarsal = m.row(1).transpose();
  }
  {
    const auto p = dir / "sf.csv";
    auto t = detail::read_csv(p);
    check_header(t, {"t", "likert"}, p);
    check_finite(t, p);
    for (const auto& row : t.rows) {
      s.sf.entries.push_back({row[0], static_cast<int>(std::lround(row[1]))});
    }
  }
  if (meta.contains("ground_truth") && meta["ground_truth"].is_string()) {
    const auto p = dir / meta["ground_truth"].get<std::string>();
    require_file(p);
    s.ground_truth = load_ground_truth(p);
    if (meta.contains("fatigue_shape")) {
      s.ground_truth->shape = fatigue_shape_from_string(meta["fatigue_shape"].get<std::string>());
    }
  }

  validate_session(s);
  return s;
}

void save_session(const SessionData& s, const fs::path& dir) {
  validate_session(s);
  fs::create_directories(dir);
  const auto& names = s.emg.muscle_names.empty() ? default_muscle_names() : s.emg.muscle_names;
  write_stream(dir / "emg.csv", names, s.emg.channels, s.emg.sample_rate);
  Matrix imu(12, s.imu.samples());
  imu << s.imu.shank, s.imu.thigh;
  write_stream(dir / "imu.csv", kImuColumns, imu, s.imu.sample_rate);
  Matrix foot(2, s.foot.samples());
  foot.row(0) = s.foot.heel.transpose();
  foot.row(1) = s.foot.metatarsal.transpose();
  write_stream(dir / "foot.csv", {"heel", "metatarsal"}, foot, s.foot.sample_rate);
  {
    detail::CsvWriter w(dir / "sf.csv", {"t", "likert"});
    for (const auto& e : s.sf.entries) w.row({e.t_s, static_cast<double>(e.likert)});
    w.close();
  }

  json meta;
  meta["subject_id"] = s.subject_id;
  meta["day_id"] = s.day_id;
  meta["session_index"] = s.session_index;
  meta["sample_rates"] = {{"emg", s.emg.sample_rate}, {"imu", s.imu.sample_rate},
                          {"foot", s.foot.sample_rate}};
  if (s.ground_truth) {
    meta["ground_truth"] = "ground_truth.csv";
    meta["fatigue_shape"] = to_string(s.ground_truth->shape);
    save_ground_truth(*s.ground_truth, dir / "ground_truth.csv");
  } else {
    meta["ground_truth"] = nullptr;
  }
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing meta.json in " + dir.string());
}

void save_trajectory(const FatigueTrajectory& traj, const fs::path& path) {
  detail::CsvWriter w(path, {"t", "F"});
  for (const auto& p : traj.samples) w.row({p.t_s, p.f});
  w.close();
}

FatigueTrajectory load_trajectory(const fs::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header != std::vector<std::string>{"t", "F"}) {
    throw Error::parse_error(1, "trajectory header must be t,F");
  }
  FatigueTrajectory traj;
  traj.samples.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = r + 2;
    const double ts = t.rows[r][0];
    const double f = t.rows[r][1];
    if (!std::isfinite(ts) || !std::isfinite(f)) throw Error::parse_error(line, "non-finite value");
    if (!traj.samples.empty() && !(ts > traj.samples.back().t_s)) {
      throw Error::parse_error(line, "timestamps not strictly increasing");
    }
    if (!(f > 0.0 && f < 1.0)) throw Error::parse_error(line, "F outside (0,1)");
    traj.samples.push_back({ts, f});
  }
  return traj;
}

void save_features(const std::vector<FeatureSample>& features, const fs::path& path) {
  const auto dim = features.empty() ? Eigen::Index{kExerciseDim} : features.front().x.size();
  std::vector<std::string> header{"t", "W", "I"};
  for (Eigen::Index k = 0; k < dim; ++k) header.push_back("x" + std::to_string(k + 1));
  detail::CsvWriter w(path, header);
  std::vector<double> row(static_cast<std::size_t>(dim) + 3);
  for (const auto& f : features) {
    if (f.x.size() != dim) throw Error(ErrorCode::ShapeMismatch, "exercise vectors differ in size");
    row[0] = f.t_s;
    row[1] = f.w;
    row[2] = f.i;
    for (Eigen::Index k = 0; k < dim; ++k) row[static_cast<std::size_t>(k) + 3] = f.x(k);
    w.row(row);
  }
  w.close();
}

std::vector<FeatureSample> load_features(const fs::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header.size() < 4 || t.header[0] != "t" || t.header[1] != "W" || t.header[2] != "I") {
    throw Error::parse_error(1, "features header must be t,W,I,x1..xd");
  }
  const auto dim = static_cast<Eigen::Index>(t.header.size() - 3);
  std::vector<FeatureSample> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    for (double v : row) {
      if (!std::isfinite(v)) throw Error::parse_error(r + 2, "non-finite feature value");
    }
    FeatureSample f;
    f.t_s = row[0];
    f.w = row[1];
    f.i = row[2];
    f.x.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) f.x(k) = row[static_cast<std::size_t>(k) + 3];
    if (!out.empty() && !(f.t_s > out.back().t_s)) {
      throw Error::parse_error(r + 2, "feature times not strictly increasing");
    }
    out.push_back(std::move(f));
  }
  return out;
}

void save_ground_truth(const GroundTruthFatigue& gt, const fs::path& path) {
  detail::CsvWriter w(path, {"t", "g"});
  for (std::size_t k = 0; k < gt.t_s.size(); ++k) w.row({gt.t_s[k], gt.g[k]});
  w.close();
}

GroundTruthFatigue load_ground_truth(const fs::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header != std::vector<std::string>{"t", "g"}) {
    throw Error::parse_error(1, "ground truth header must be t,g");
  }
  GroundTruthFatigue gt;
  for (const auto& row : t.rows) {
    gt.t_s.push_back(row[0]);
    gt.g.push_back(row[1]);
  }
  return gt;
}

std::string report_to_json(const MetricsReport& report, int indent) {
  json j;
  j["wo"] = number_or_null(report.wo);
  j["wo_three_way"] = number_or_null(report.wo_three_way);
  json tr = json::object();
  for (const auto& [k, v] : report.tr) tr[k] = number_or_null(v);
  j["tr"] = tr;
  j["s"] = number_or_null(report.suitability);
  return j.dump(indent);
}

void save_report(const MetricsReport& report, const fs::path& path) {
  std::ofstream out(path);
  out << report_to_json(report) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace mfatigue
