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

// Minimal numeric CSV reader/writer shared by the file formats. Numbers are
// written in shortest round-trip form so reload is exact.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfatigue/error.hpp"

namespace mfatigue::detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Parses a numeric CSV with a header line. Malformed numbers raise
/// ParseError with the 1-based file line; non-finite values are kept so the
/// caller can report them with its own row/column convention.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error::parse_error(1, "missing header in " + path.string());
  ++line_no;
  for (auto f : split_fields(trim(line))) table.header.emplace_back(trim(f));
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_fields(body);
    if (fields.size() != table.header.size()) {
      throw Error::parse_error(line_no, "expected " + std::to_string(table.header.size()) +
                                            " fields in " + path.string());
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = trim(fields[c]);
      const auto* end = f.data() + f.size();
      auto [ptr, ec] = std::from_chars(f.data(), end, row[c]);
      if (ec != std::errc() || ptr != end) {
        throw Error::parse_error(line_no, "bad number '" + std::string(f) + "' in " + path.string());
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) line.push_back(',');
      line += header[i];
    }
    line.push_back('\n');
    out_ << line;
  }

  void row(const std::vector<double>& values) {
    buffer_.clear();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) buffer_.push_back(',');
      append_number(buffer_, values[i]);
    }
    buffer_.push_back('\n');
    out_ << buffer_;
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::Io, "failed writing " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::string buffer_;
};

}  // namespace mfatigue::detail
