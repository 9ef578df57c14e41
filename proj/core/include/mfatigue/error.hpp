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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfatigue {

enum class ErrorCode {
  // data / ingestion
  MissingStream,
  CorruptSample,
  DurationMismatch,
  ParseError,
  Io,
  // signal conditioning
  InvalidCutoff,
  SignalTooShort,
  UnstableFilter,
  WindowTooShort,
  EmptyWindow,
  // factorization / shapes
  DegenerateInput,
  RankTooHigh,
  ShapeMismatch,
  // estimator / training
  NumericalFailure,
  InvalidPair,
  TooShort,
  EmptyDataset,
  NotEnoughForSplit,
  EmptyInput,
  // configuration
  ConfigError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Whether an error stems from bad input data (as opposed to numerics or
/// programming errors). The CLI maps this onto its exit codes.
bool is_data_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Optional location details; set by the ingestion layer.
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  std::optional<std::size_t> line;

  static Error corrupt_sample(std::size_t row, std::size_t col, const std::string& file);
  static Error parse_error(std::size_t line, const std::string& what);

 private:
  ErrorCode code_;
};

}  // namespace mfatigue
