// Copyright 2026 The proxattr Authors
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
#include <stdexcept>
#include <string>
#include <string_view>

namespace proxattr {

enum class Errc {
  InvalidArgument,
  InvalidDelta,
  NoData,
  GridMismatch,
  MalformedRow,
  NonFiniteCoordinate,
  BadTimestamp,
  ValueOutOfRange,
  SchemaError,
  DegreeOutOfRange,
  InvalidBox,
  ParseError,
  InfeasibleLayout,
  UnknownSensor,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidDelta: return "InvalidDelta";
    case Errc::NoData: return "NoData";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case Errc::BadTimestamp: return "BadTimestamp";
    case Errc::ValueOutOfRange: return "ValueOutOfRange";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DegreeOutOfRange: return "DegreeOutOfRange";
    case Errc::InvalidBox: return "InvalidBox";
    case Errc::ParseError: return "ParseError";
    case Errc::InfeasibleLayout: return "InfeasibleLayout";
    case Errc::UnknownSensor: return "UnknownSensor";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception. `line()`
/// is the 1-based input line for row-addressed parse errors, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Errc code_;
  std::size_t line_;
};

}  // namespace proxattr
