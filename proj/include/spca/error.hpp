// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spca {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteInput,
  NonPositiveMu,
  DimensionMismatch,
  NotPositiveSemidefinite,
  InfeasiblePrimal,
  InfeasibleDual,
  NonFiniteIterate,
  BadCardinality,
  EmptyPattern,
  NotUnitNorm,
  DegenerateDenominator,
  EmptyGrid,
  TooLarge,
  BadShape,
  ZeroComponent,
  UnknownMethod,
  DegenerateTruth,
  ParseError,
  AsymmetricInput,
  RaggedRows,
  TooFewRows,
  NonPositivePrice,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonPositiveMu: return "NonPositiveMu";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::InfeasiblePrimal: return "InfeasiblePrimal";
    case ErrorCode::InfeasibleDual: return "InfeasibleDual";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::BadCardinality: return "BadCardinality";
    case ErrorCode::EmptyPattern: return "EmptyPattern";
    case ErrorCode::NotUnitNorm: return "NotUnitNorm";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::ZeroComponent: return "ZeroComponent";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::DegenerateTruth: return "DegenerateTruth";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spca
