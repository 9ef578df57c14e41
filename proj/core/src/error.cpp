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

#include "mfatigue/error.hpp"

namespace mfatigue {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingStream: return "MissingStream";
    case ErrorCode::CorruptSample: return "CorruptSample";
    case ErrorCode::DurationMismatch: return "DurationMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::UnstableFilter: return "UnstableFilter";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::RankTooHigh: return "RankTooHigh";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NotEnoughForSplit: return "NotEnoughForSplit";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::corrupt_sample(std::size_t row, std::size_t col, const std::string& file) {
  Error e(ErrorCode::CorruptSample, "non-finite sample at (" + std::to_string(row) + ", " +
                                        std::to_string(col) + ") in " + file);
  e.row = row;
  e.col = col;
  return e;
}

Error Error::parse_error(std::size_t line, const std::string& what) {
  Error e(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
  e.line = line;
  return e;
}

}  // namespace mfatigue
