#pragma once

// Helpers shared by the test suites and the acceptance runner.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fmlog/cli.hpp"
#include "fmlog/corpus.hpp"
#include "fmlog/engine.hpp"
#include "fmlog/funceval.hpp"
#include "fmlog/smt.hpp"
#include "fmlog/types.hpp"

namespace fmlog::testing {

inline std::filesystem::path corpusRoot() { return std::filesystem::path(FMLOG_SOURCE_DIR) / "corpus"; }

inline std::string readText(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> pathStrings(const std::vector<std::filesystem::path>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.string());
  return out;
}

// Every relation of the program, dumped in name order.
inline std::string dumpAll(const syntax::SourceProgram& p, const engine::FactDatabase& db) {
  std::vector<Symbol> rels;
  for (const syntax::RelDecl& r : p.relDecls) rels.push_back(r.name);
  std::sort(rels.begin(), rels.end(), [](Symbol a, Symbol b) { return terms::symName(a) < terms::symName(b); });
  return db.dump(rels);
}

enum class Evaluator { Pipelined, Naive };

// Evaluates an already loaded program against fact directories with a fresh
// solver and function table, returning the dump of every relation.
inline std::string evaluateToDump(const cli::LoadedProgram& lp, const std::vector<std::string>& factDirs,
                                  Evaluator how = Evaluator::Pipelined, engine::Options options = {},
                                  engine::Stats* stats = nullptr) {
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());
  engine::FactDatabase edb = cli::loadFactDirs(lp.source, factDirs);
  engine::FactDatabase db = how == Evaluator::Naive ? engine::naiveEvaluate(lp.stratified, fns, std::move(edb))
                                                    : engine::evaluate(lp.stratified, fns, std::move(edb), options, stats);
  return dumpAll(lp.source, db);
}

inline cli::LoadedProgram loadChecked(const syntax::SourceProgram& p) {
  cli::LoadedProgram lp;
  lp.source = p;
  types::checkProgram(lp.source);
  lp.stratified = validate::validateProgram(lp.source);
  return lp;
}

// Concrete chain family for unification: with f(N) = b(N + 1),
//   a(f(X_n), ..., f(X_0), b(0)) = a(b(X_{n+1}), ..., b(X_1), b(X_0))
// resolves right to left to X_i = i.
inline TermId chainReducer(TermId c) {
  const TermNode& n = terms::node(c);
  if (terms::symName(n.sym) != "f") throw Error(ErrorKind::MatchFailure, "unexpected call " + terms::render(c));
  return terms::ctor("b", {terms::integer(terms::node(n.args[0]).value + 1)});
}

inline std::pair<TermId, TermId> chainInstance(int n) {
  auto& st = terms::store();
  std::vector<TermId> lhs, rhs;
  for (int i = n; i >= 0; --i) lhs.push_back(terms::call("f", {terms::var("X" + std::to_string(i))}));
  lhs.push_back(terms::ctor("b", {terms::integer(0)}));
  for (int i = n + 1; i >= 0; --i) rhs.push_back(terms::ctor("b", {terms::var("X" + std::to_string(i))}));
  return {st.ctor(terms::sym("a"), lhs), st.ctor(terms::sym("a"), rhs)};
}

}  // namespace fmlog::testing
