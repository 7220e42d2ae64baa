#pragma once

// Input generators and reference oracles for the bundled example programs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fmlog/engine.hpp"
#include "fmlog/syntax.hpp"
#include "fmlog/terms.hpp"

namespace fmlog::corpus {

/// Directed Erdos-Renyi graph over vertices 0..n-1 without self-loops, in
/// row-major order. Deterministic for a fixed seed.
std::vector<std::pair<int, int>> generateGraph(int n, double p, std::uint64_t seed);

/// Writes `e.tsv` for the graph into `dir` and returns the edge count.
std::size_t writeGraph(const std::filesystem::path& dir, int n, double p, std::uint64_t seed);

/// Random ground bool_exp of nesting depth at most `maxDepth` over the
/// symbols named in `symbols`.
TermId randomFormula(std::mt19937_64& rng, int maxDepth, const std::vector<std::string>& symbols);

/// One bundled program and the fact directories it runs against. A program
/// with several fact directories appears once per directory.
struct BundledProgram {
  std::string name;
  std::filesystem::path source;
  std::vector<std::filesystem::path> factDirs;
};

/// Every positive example under `corpusRoot`, sorted by name. Programs under
/// negative/ are excluded.
std::vector<BundledProgram> bundledPrograms(const std::filesystem::path& corpusRoot);

/// Shuffles clause order and the premise order inside every rule body.
syntax::SourceProgram permuteProgram(syntax::SourceProgram p, std::mt19937_64& rng);

/// Source text of a random stratified Datalog program over i32 with at most
/// 5 relations, 8 rules and 50 in-source input facts. Negation only refers
/// to relations defined earlier, and every rule is range restricted.
std::string randomDatalogProgram(std::mt19937_64& rng);

/// A register program as given to the symbolic executor corpus program.
/// Instructions are kept as inst terms; stores map register names to
/// bv32_exp terms.
struct RegisterProgram {
  std::map<int, TermId> stmts;
  std::map<int, int> fallThru;
  int startNode = 0;
  std::map<std::string, TermId> startStore;
  int fuel = 0;
};

/// Reads stmt, fall_thru_succ, start and init_fuel out of a fact database.
/// Throws IoError unless there is exactly one start and one init_fuel
/// fact.
RegisterProgram registerProgramFromFacts(const engine::FactDatabase& db);

/// A symbolic state with the store flattened to its visible bindings, so
/// states from the oracle and from the engine compare directly.
struct SymState {
  int node = 0;
  std::map<std::string, TermId> store;
  TermId pathCondition = kNoTerm;
  int counter = 0;
  int fuel = 0;
  friend auto operator<=>(const SymState&, const SymState&) = default;
};

/// Decodes the (node, state) tuple of a reach, step_to or failed_assert fact.
SymState decodeState(TermId factTuple);

struct OracleResult {
  std::set<SymState> reach;
  std::set<SymState> failedAsserts;
  std::map<int, std::size_t> reachPerNode;
};

/// Worklist symbolic execution of `rp`. Each step costs one unit of fuel and
/// a state with no fuel left is dropped. A conditional jump forks into the
/// taken branch and the fall-through branch, each kept only when its path
/// condition is satisfiable.
OracleResult symexecOracle(const RegisterProgram& rp, const std::function<bool(TermId)>& isSat);

}  // namespace fmlog::corpus
