#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fmlog {

/// Pipeline stage that raised an error. Each stage maps to a distinct CLI
/// exit status.
enum class Stage { Io, Parse, TypeCheck, Validate, Evaluate };

enum class ErrorKind {
  // parse
  SyntaxError,
  ResolutionError,
  // types
  TypeMismatch,
  OccursCheckFailure,
  TypeError,
  // validate
  UnboundHeadVariable,
  UnboundFunctionArgument,
  UnstratifiableNegation,
  NoValidOrder,
  NonLinearPattern,
  InputRelationRule,
  // evaluation
  StuckFunction,
  MatchFailure,
  StepLimitExceeded,
  DivisionByZero,
  BackendUnavailable,
  TranslationError,
  ResourceLimit,
  UnsupportedOperation,
  // fact ingestion / io
  ArityMismatch,
  TermParseError,
  IoError,
};

std::string_view kindName(ErrorKind kind);
std::string_view stageName(Stage stage);
Stage stageOf(ErrorKind kind);

struct Location {
  int line = 0;
  int column = 0;

  bool known() const { return line > 0; }
  std::string str() const;
  friend bool operator==(const Location&, const Location&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, Location loc = {});

  ErrorKind kind() const { return kind_; }
  Stage stage() const { return stageOf(kind_); }
  const Location& location() const { return loc_; }
  // Message without the location prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  Location loc_;
  std::string detail_;
};

}  // namespace fmlog
