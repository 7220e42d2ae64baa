#include "fmlog/error.hpp"

namespace fmlog {

std::string_view kindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::ResolutionError: return "ResolutionError";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::OccursCheckFailure: return "OccursCheckFailure";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::UnboundHeadVariable: return "UnboundHeadVariable";
    case ErrorKind::UnboundFunctionArgument: return "UnboundFunctionArgument";
    case ErrorKind::UnstratifiableNegation: return "UnstratifiableNegation";
    case ErrorKind::NoValidOrder: return "NoValidOrder";
    case ErrorKind::NonLinearPattern: return "NonLinearPattern";
    case ErrorKind::InputRelationRule: return "InputRelationRule";
    case ErrorKind::StuckFunction: return "StuckFunction";
    case ErrorKind::MatchFailure: return "MatchFailure";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::TranslationError: return "TranslationError";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::UnsupportedOperation: return "UnsupportedOperation";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::TermParseError: return "TermParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

std::string_view stageName(Stage stage) {
  switch (stage) {
    case Stage::Io: return "io";
    case Stage::Parse: return "parse";
    case Stage::TypeCheck: return "typecheck";
    case Stage::Validate: return "validate";
    case Stage::Evaluate: return "evaluate";
  }
  return "unknown";
}

Stage stageOf(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError:
    case ErrorKind::ResolutionError:
      return Stage::Parse;
    case ErrorKind::TypeMismatch:
    case ErrorKind::OccursCheckFailure:
    case ErrorKind::TypeError:
      return Stage::TypeCheck;
    case ErrorKind::UnboundHeadVariable:
    case ErrorKind::UnboundFunctionArgument:
    case ErrorKind::UnstratifiableNegation:
    case ErrorKind::NoValidOrder:
    case ErrorKind::NonLinearPattern:
    case ErrorKind::InputRelationRule:
      return Stage::Validate;
    case ErrorKind::ArityMismatch:
    case ErrorKind::TermParseError:
    case ErrorKind::IoError:
      return Stage::Io;
    default:
      return Stage::Evaluate;
  }
}

std::string Location::str() const {
  if (!known()) return "?";
  return std::to_string(line) + ":" + std::to_string(column);
}

namespace {
std::string compose(ErrorKind kind, const std::string& message, const Location& loc) {
  std::string out(kindName(kind));
  if (loc.known()) out += " at " + loc.str();
  out += ": ";
  out += message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::string message, Location loc)
    : std::runtime_error(compose(kind, message, loc)),
      kind_(kind),
      loc_(loc),
      detail_(std::move(message)) {}

}  // namespace fmlog
