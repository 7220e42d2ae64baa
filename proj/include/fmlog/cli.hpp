#pragma once

// The command-line pipeline: load, check, ingest facts, evaluate, dump.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fmlog/engine.hpp"
#include "fmlog/smt.hpp"
#include "fmlog/validate.hpp"

namespace fmlog::cli {

struct RunConfig {
  std::string programPath;
  std::vector<std::string> factDirs;
  int workers = 1;
  /// "builtin", "external" (path from FMLOG_SMT_SOLVER or PATH) or
  /// "external:PATH".
  std::string smtBackend = "builtin";
  /// Relation names, or the single entry "all" for every output relation.
  std::vector<std::string> dumpRelations = {"all"};
  std::uint64_t stepBudget = 100'000'000;
  std::uint64_t seed = 0;
  bool timingReport = false;
};

/// Exit status for each stage; 0 is success.
int exitCode(Stage stage);
inline constexpr int kUsageExit = 64;

struct LoadedProgram {
  syntax::SourceProgram source;
  validate::StratifiedProgram stratified;
};

/// Parses, type checks and validates. Throws Error.
LoadedProgram loadProgram(const std::string& text);
LoadedProgram loadProgramFile(const std::string& path);

/// Reads one tab-separated fact file for `relation`. `name` is used in
/// messages. Throws ArityMismatch, TermParseError or TypeError.
void ingestFacts(const syntax::SourceProgram& program, const syntax::RelDecl& relation, std::istream& in,
                 const std::string& name, engine::FactDatabase& db);

/// Reads `<relation>.tsv` for every declared relation found in each
/// directory. A .tsv file naming no declared relation is an error.
engine::FactDatabase loadFactDirs(const syntax::SourceProgram& program, const std::vector<std::string>& dirs);

/// Builds the backend named by a --smt value.
std::shared_ptr<smt::Backend> makeBackend(const std::string& choice);

/// Formats a diagnostic as `error[stage]: file:line:col: message`.
std::string diagnostic(const Error& e, const std::string& file);

/// Runs the whole pipeline. Dumps go to `out`; diagnostics and the timing
/// report go to `err`. Returns the exit status.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace fmlog::cli
