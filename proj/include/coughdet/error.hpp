/*
 * Copyright 2026 The coughdet Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the License); you may
 * not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an AS IS BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coughdet {

enum class ErrorKind {
  MalformedWav,
  UnsupportedFormat,
  EmptyStream,
  InvalidBand,
  NegativeFrequency,
  NegativeMel,
  DegenerateFilter,
  ConfigMismatch,
  InvalidConfig,
  BadMagic,
  ShapeMismatch,
  TruncatedFile,
  ChecksumMismatch,
  InvalidWeights,
  InputTooSmall,
  NonFiniteInput,
  NonContiguousSegments,
  EmptyClass,
  Io,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedWav: return "MalformedWav";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::InvalidBand: return "InvalidBand";
    case ErrorKind::NegativeFrequency: return "NegativeFrequency";
    case ErrorKind::NegativeMel: return "NegativeMel";
    case ErrorKind::DegenerateFilter: return "DegenerateFilter";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::InputTooSmall: return "InputTooSmall";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonContiguousSegments: return "NonContiguousSegments";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable for programmatic
/// handling; `detail()` carries the human-readable context (offending layer,
/// what was found in a header, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace coughdet
