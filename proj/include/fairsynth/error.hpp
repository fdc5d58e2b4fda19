#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairsynth {

enum class ErrorCode {
  InvalidArgument,
  InvalidSchema,
  MissingColumn,
  UnparseableCell,
  MissingValue,
  UnseenCategory,
  TargetNotBinary,
  SchemaMismatch,
  SubgroupLabelMismatch,
  TooFewRowsPerClass,
  EmptyRequiredSubgroup,
  DegenerateRatio,
  TooFewRows,
  NotApplicable,
  SingleClassTraining,
  AucUndefined,
  AllRatesUndefined,
  LeakageDetected,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableCell: return "UnparseableCell";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::UnseenCategory: return "UnseenCategory";
    case ErrorCode::TargetNotBinary: return "TargetNotBinary";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::SubgroupLabelMismatch: return "SubgroupLabelMismatch";
    case ErrorCode::TooFewRowsPerClass: return "TooFewRowsPerClass";
    case ErrorCode::EmptyRequiredSubgroup: return "EmptyRequiredSubgroup";
    case ErrorCode::DegenerateRatio: return "DegenerateRatio";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::AucUndefined: return "AucUndefined";
    case ErrorCode::AllRatesUndefined: return "AllRatesUndefined";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code identifies the contract that
/// was violated; the message names the offending row, column or subgroup.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fairsynth
