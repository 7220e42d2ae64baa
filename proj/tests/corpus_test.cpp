#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace fmlog;
using namespace fmlog::testing;

namespace {

TermId i(std::int32_t v) { return terms::integer(v); }

TEST(GenerateGraph, EmptyAndComplete) {
  EXPECT_TRUE(corpus::generateGraph(0, 0.5, 1).empty());
  auto all = corpus::generateGraph(3, 1.0, 99);
  std::vector<std::pair<int, int>> expected = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  EXPECT_EQ(all, expected);
  EXPECT_TRUE(corpus::generateGraph(50, 0.0, 5).empty());
}

TEST(GenerateGraph, DeterministicAndLoopFree) {
  auto a = corpus::generateGraph(60, 0.2, 8);
  EXPECT_EQ(a, corpus::generateGraph(60, 0.2, 8));
  EXPECT_NE(a, corpus::generateGraph(60, 0.2, 9));
  for (auto [x, y] : a) EXPECT_NE(x, y);
}

TEST(GenerateGraph, EdgeCountWithinBinomialBound) {
  const int n = 200;
  const double p = 0.1;
  const double trials = n * (n - 1.0);
  const double mean = trials * p;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (std::uint64_t seed : {42u, 1u, 2u, 3u}) {
    double edges = static_cast<double>(corpus::generateGraph(n, p, seed).size());
    EXPECT_LE(std::abs(edges - mean), 3 * sd) << "seed " << seed;
  }
}

TEST(GenerateGraph, WritesTsv) {
  auto dir = std::filesystem::temp_directory_path() / "fmlog_gen_graph_test";
  std::filesystem::remove_all(dir);
  EXPECT_EQ(corpus::writeGraph(dir, 3, 1.0, 0), 6u);
  EXPECT_EQ(readText(dir / "e.tsv"), "0\t1\n0\t2\n1\t0\n1\t2\n2\t0\n2\t1\n");
  std::filesystem::remove_all(dir);
}

TEST(BundledPrograms, ListsEveryPositiveExample) {
  std::vector<std::string> names;
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) names.push_back(bp.name);
  std::vector<std::string> expected = {"strata", "symexec/checks", "symexec/loop3", "tc/small", "tree_sum"};
  EXPECT_EQ(names, expected);
}

TEST(RandomDatalog, ProgramsLoadAndStayInBounds) {
  std::mt19937_64 rng(5);
  int nonEmpty = 0;
  for (int n = 0; n < 100; ++n) {
    std::string src = corpus::randomDatalogProgram(rng);
    cli::LoadedProgram lp;
    ASSERT_NO_THROW(lp = cli::loadProgram(src)) << src;
    EXPECT_LE(lp.source.relDecls.size(), 5u);
    EXPECT_LE(lp.source.ruleCount(), 8u);
    EXPECT_LE(lp.source.factCount(), 50u);
    std::string out = evaluateToDump(lp, {});
    nonEmpty += out.size() > 0;
  }
  EXPECT_GT(nonEmpty, 50);
}

// ---- symbolic execution ----

struct Symexec {
  cli::LoadedProgram lp = cli::loadProgramFile((corpusRoot() / "symexec" / "symexec.fml").string());
  smt::Solver solver{std::make_shared<smt::BuiltinBackend>()};

  TermId term(const std::string& text) { return syntax::parseGroundTerm(text, lp.source); }

  engine::FactDatabase factsFor(const corpus::RegisterProgram& rp) {
    engine::FactDatabase db;
    for (auto [n, inst] : rp.stmts) db.insert(terms::sym("stmt"), {i(n), inst});
    for (auto [a, b] : rp.fallThru) db.insert(terms::sym("fall_thru_succ"), {i(a), i(b)});
    TermId store = terms::ctor("mnil");
    for (auto it = rp.startStore.rbegin(); it != rp.startStore.rend(); ++it)
      store = terms::ctor("mcons", {terms::store().string(it->first), it->second, store});
    db.insert(terms::sym("start"), {i(rp.startNode), store});
    db.insert(terms::sym("init_fuel"), {i(rp.fuel)});
    return db;
  }

  corpus::RegisterProgram fromDir(const std::string& name) {
    return corpus::registerProgramFromFacts(
        cli::loadFactDirs(lp.source, {(corpusRoot() / "symexec" / name).string()}));
  }

  struct EngineResult {
    std::set<corpus::SymState> reach;
    std::set<corpus::SymState> failed;
  };

  EngineResult runEngine(const corpus::RegisterProgram& rp, int workers = 1) {
    funceval::FunctionTable fns(lp.source, solver.services());
    engine::Options o;
    o.workers = workers;
    engine::FactDatabase db = engine::evaluate(lp.stratified, fns, factsFor(rp), o);
    EngineResult r;
    for (TermId f : db.facts(terms::sym("reach"))) r.reach.insert(corpus::decodeState(f));
    for (TermId f : db.facts(terms::sym("failed_assert"))) r.failed.insert(corpus::decodeState(f));
    EXPECT_EQ(r.reach.size(), db.size(terms::sym("reach")));
    return r;
  }

  corpus::OracleResult runOracle(const corpus::RegisterProgram& rp) {
    return corpus::symexecOracle(rp, [&](TermId f) { return solver.isSat(f); });
  }
};

corpus::RegisterProgram straightLine(Symexec& s, int fuel) {
  corpus::RegisterProgram rp;
  rp.stmts = {{0, s.term("inst_const(\"a\", 1)")},
              {1, s.term("inst_binop(op_add, \"b\", \"a\", \"a\")")},
              {2, s.term("inst_neg(\"c\", \"b\")")},
              {3, s.term("inst_fail")}};
  rp.fallThru = {{0, 1}, {1, 2}, {2, 3}};
  rp.fuel = fuel;
  return rp;
}

TEST(SymexecOracle, StraightLineReachesFailure) {
  Symexec s;
  for (int fuel : {4, 5, 9}) {
    auto r = s.runOracle(straightLine(s, fuel));
    ASSERT_EQ(r.failedAsserts.size(), 1u) << fuel;
    const corpus::SymState& st = *r.failedAsserts.begin();
    EXPECT_EQ(st.node, 3);
    EXPECT_EQ(st.fuel, fuel - 4);
    EXPECT_EQ(st.store.at("c"), s.term("bv32_neg(bv32_add(bv32_const(1), bv32_const(1)))"));
    EXPECT_EQ(r.reach.size(), 4u);
  }
  // One unit short of the length: the failing node is never reached.
  EXPECT_TRUE(s.runOracle(straightLine(s, 3)).failedAsserts.empty());
}

TEST(SymexecOracle, ContradictoryPathIsPruned) {
  Symexec s;
  corpus::RegisterProgram rp;
  rp.stmts = {{0, s.term("inst_const(\"three\", 3)")},
              {1, s.term("inst_const(\"five\", 5)")},
              {2, s.term("inst_jmp(cond_lt, \"x\", \"three\", 3)")},
              {3, s.term("inst_jmp(cond_gt, \"x\", \"five\", 4)")},
              {4, s.term("inst_fail")}};
  rp.fallThru = {{0, 1}, {1, 2}, {3, 9}};
  rp.startStore = {{"x", s.term("bv32_sym(\"x\")")}};
  rp.fuel = 20;
  auto oracle = s.runOracle(rp);
  EXPECT_TRUE(oracle.failedAsserts.empty());
  EXPECT_EQ(oracle.reachPerNode.count(4), 0u);
  EXPECT_EQ(oracle.reachPerNode.at(9), 1u);
  EXPECT_TRUE(s.runEngine(rp).failed.empty());
}

TEST(SymexecOracle, RegisterProgramFromFacts) {
  Symexec s;
  auto rp = s.fromDir("loop3");
  EXPECT_EQ(rp.stmts.size(), 6u);
  EXPECT_EQ(rp.fallThru.at(3), 0);
  EXPECT_EQ(rp.startNode, 0);
  EXPECT_EQ(rp.fuel, 8);
  EXPECT_EQ(rp.startStore.at("k"), s.term("bv32_const(7)"));
  EXPECT_THROW(corpus::registerProgramFromFacts(engine::FactDatabase{}), Error);
}

class SymexecAgreement : public ::testing::TestWithParam<std::string> {};

TEST_P(SymexecAgreement, EngineMatchesOracleForFuelOneToTen) {
  Symexec s;
  auto rp = s.fromDir(GetParam());
  for (int fuel = 1; fuel <= 10; ++fuel) {
    rp.fuel = fuel;
    auto oracle = s.runOracle(rp);
    auto engine = s.runEngine(rp, 1 + fuel % 3);
    EXPECT_EQ(engine.reach.size(), oracle.reach.size()) << "fuel " << fuel;
    EXPECT_TRUE(engine.reach == oracle.reach) << "fuel " << fuel;
    EXPECT_TRUE(engine.failed == oracle.failedAsserts) << "fuel " << fuel;
  }
}

INSTANTIATE_TEST_SUITE_P(Bundled, SymexecAgreement, ::testing::Values("loop3", "checks"));

TEST(Symexec, ReachStatesAreFeasibleAndFuelled) {
  Symexec s;
  auto rp = s.fromDir("loop3");
  rp.fuel = 9;
  auto engine = s.runEngine(rp, 2);
  ASSERT_FALSE(engine.reach.empty());
  // Re-check with a fresh solver so no cached verdict is reused.
  smt::BuiltinBackend fresh;
  for (const auto& st : engine.reach) {
    EXPECT_GE(st.fuel, 0);
    EXPECT_EQ(fresh.checkSat(st.pathCondition), smt::SatResult::Sat);
  }
}

TEST(Symexec, MoreFuelNeverLosesFailures) {
  Symexec s;
  for (const char* dir : {"loop3", "checks"}) {
    auto rp = s.fromDir(dir);
    std::set<std::pair<int, TermId>> previous;
    for (int fuel = 1; fuel <= 10; ++fuel) {
      rp.fuel = fuel;
      // States carry their remaining fuel, so compare what fails where and
      // under which path condition.
      std::set<std::pair<int, TermId>> current;
      for (const auto& st : s.runEngine(rp).failed) current.emplace(st.node, st.pathCondition);
      EXPECT_TRUE(std::includes(current.begin(), current.end(), previous.begin(), previous.end()))
          << dir << " fuel " << fuel;
      previous = std::move(current);
    }
  }
}

TEST(Symexec, LoopForksThreeWaysPerIteration) {
  Symexec s;
  auto rp = s.fromDir("loop3");
  // After one havoc and the two comparisons, three feasible states re-enter
  // the loop head: a < b, a = b (via node 4), and a > b with a /= 7.
  rp.fuel = 4;
  auto oracle = s.runOracle(rp);
  EXPECT_EQ(oracle.reachPerNode.at(0), 2u);  // initial state and the a < b branch
  EXPECT_EQ(oracle.reachPerNode.at(3), 1u);
  EXPECT_EQ(oracle.reachPerNode.at(4), 1u);
}

}  // namespace
