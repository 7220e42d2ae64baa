#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

#include "support.hpp"

using namespace fmlog;
using namespace fmlog::testing;
using engine::FactDatabase;

namespace {

TermId i(std::int32_t v) { return terms::integer(v); }
TermId tup(std::vector<TermId> xs) { return terms::store().tuple(xs); }

struct Env {
  cli::LoadedProgram lp;
  smt::Solver solver{std::make_shared<smt::BuiltinBackend>()};
  std::unique_ptr<funceval::FunctionTable> fns;

  explicit Env(const std::string& src) : lp(cli::loadProgram(src)) {
    fns = std::make_unique<funceval::FunctionTable>(lp.source, solver.services());
  }

  const validate::OrderedRule& rule(const std::string& headRel, std::size_t nth = 0) {
    for (const auto& stratum : lp.stratified.rulesByStratum)
      for (const auto& r : stratum)
        if (terms::symName(r.head.relation) == headRel && nth-- == 0) return r;
    throw std::runtime_error("no rule for " + headRel);
  }
};

std::size_t premiseOn(const validate::OrderedRule& r, const std::string& rel) {
  for (std::size_t k = 0; k < r.body.size(); ++k)
    if (r.body[k].kind == syntax::Premise::Kind::Positive && terms::symName(r.body[k].atom.relation) == rel) return k;
  throw std::runtime_error("no premise on " + rel);
}

const char* kTc = R"(
declare input e(i32, i32).
declare output tc(i32, i32).
tc(X, Y) :- e(X, Y).
tc(X, Z) :- tc(X, Y), e(Y, Z).
)";

TEST(Engine, TreeSumMatchesGolden) {
  auto lp = cli::loadProgramFile((corpusRoot() / "tree_sum" / "tree_sum.fml").string());
  std::string golden = readText(corpusRoot() / "tree_sum" / "tree_sum.golden");
  for (Evaluator how : {Evaluator::Pipelined, Evaluator::Naive}) {
    smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
    funceval::FunctionTable fns(lp.source, solver.services());
    FactDatabase db = how == Evaluator::Naive ? engine::naiveEvaluate(lp.stratified, fns, {})
                                              : engine::evaluate(lp.stratified, fns, {});
    EXPECT_EQ(db.dump(terms::sym("tree_sum")), golden);
  }
}

TEST(Engine, TwoHopClosure) {
  std::string src = std::string(kTc) + "e(1, 2).\ne(2, 3).\n";
  auto lp = cli::loadProgram(src);
  EXPECT_EQ(evaluateToDump(lp, {}), "e(1, 2)\ne(2, 3)\ntc(1, 2)\ntc(1, 3)\ntc(2, 3)\n");
}

TEST(Engine, EmptyProgramGivesEmptyDatabase) {
  auto lp = cli::loadProgram("");
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());
  EXPECT_EQ(engine::evaluate(lp.stratified, fns, {}).totalSize(), 0u);
  EXPECT_EQ(engine::naiveEvaluate(lp.stratified, fns, {}).totalSize(), 0u);
}

TEST(Engine, JoinStepExtendsTrigger) {
  Env env(kTc);
  FactDatabase db;
  db.insert(terms::sym("e"), {i(2), i(3)});
  db.insert(terms::sym("e"), {i(5), i(6)});
  const auto& r = env.rule("tc", 1);
  auto out = engine::joinStep(r, premiseOn(r, "tc"), tup({i(1), i(2)}), db, *env.fns);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], tup({i(1), i(3)}));
}

TEST(Engine, JoinStepTriggerMismatch) {
  Env env("declare input q(i32, i32).\ndeclare output p(i32).\np(X) :- q(X, 1).\n");
  FactDatabase db;
  const auto& r = env.rule("p");
  EXPECT_TRUE(engine::joinStep(r, 0, tup({i(2), i(3)}), db, *env.fns).empty());
  EXPECT_EQ(engine::joinStep(r, 0, tup({i(2), i(1)}), db, *env.fns), std::vector<TermId>{tup({i(2)})});
}

// Hand-built reach state whose path condition already says x >= 3; a jump
// taken on x < 3 must be pruned by the is_sat gate while the fall-through
// survives.
TEST(Engine, JoinStepUnsatisfiableBranchIsPruned) {
  Env env(readText(corpusRoot() / "symexec" / "symexec.fml"));
  const auto& P = env.lp.source;
  TermId x = syntax::parseGroundTerm("bv32_sym(\"x\")", P);
  TermId store = syntax::parseGroundTerm("mcons(\"t\", bv32_const(3), mcons(\"x\", bv32_sym(\"x\"), mnil))", P);
  TermId pc = syntax::parseGroundTerm("and(not(bv32_slt(bv32_sym(\"x\"), bv32_const(3))), true)", P);
  TermId state = tup({store, pc, i(0), i(5)});
  FactDatabase db;
  db.insert(terms::sym("stmt"), {i(1), syntax::parseGroundTerm("inst_jmp(cond_lt, \"x\", \"t\", 3)", P)});
  db.insert(terms::sym("fall_thru_succ"), {i(1), i(2)});

  // The contradiction really is unsatisfiable.
  TermId taken = terms::ctor("and", {terms::ctor("bv32_slt", {x, terms::ctor("bv32_const", {i(3)})}), pc});
  EXPECT_FALSE(smt::builtinCheckSat(taken) == smt::SatResult::Sat);

  std::size_t derivedTaken = 0, derivedFall = 0;
  for (std::size_t k = 0;; ++k) {
    const validate::OrderedRule* r = nullptr;
    try {
      r = &env.rule("step_to", k);
    } catch (const std::runtime_error&) {
      break;
    }
    bool hasReach = false;
    for (const auto& pr : r->body)
      hasReach |= pr.kind == syntax::Premise::Kind::Positive && terms::symName(pr.atom.relation) == "reach";
    if (!hasReach) continue;
    for (TermId head : engine::joinStep(*r, premiseOn(*r, "reach"), tup({i(1), state}), db, *env.fns)) {
      int target = terms::node(terms::node(head).args[0]).value;
      (target == 3 ? derivedTaken : derivedFall) += 1;
    }
  }
  EXPECT_EQ(derivedTaken, 0u);
  EXPECT_EQ(derivedFall, 1u);
}

TEST(Engine, MatchesNaiveOnCorpusForAllWorkerCounts) {
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) {
    auto lp = cli::loadProgramFile(bp.source.string());
    auto dirs = pathStrings(bp.factDirs);
    std::string naive = evaluateToDump(lp, dirs, Evaluator::Naive);
    EXPECT_FALSE(naive.empty()) << bp.name;
    for (int w : {1, 2, 4, 8}) {
      engine::Options o;
      o.workers = w;
      o.seed = 17 * w;
      EXPECT_EQ(evaluateToDump(lp, dirs, Evaluator::Pipelined, o), naive) << bp.name << " workers=" << w;
    }
  }
}

TEST(Engine, MatchesNaiveOnRandomPrograms) {
  std::mt19937_64 rng(2024);
  for (int n = 0; n < 40; ++n) {
    std::string src = corpus::randomDatalogProgram(rng);
    auto lp = cli::loadProgram(src);
    std::string naive = evaluateToDump(lp, {}, Evaluator::Naive);
    engine::Options o;
    o.workers = 1 + n % 4;
    EXPECT_EQ(evaluateToDump(lp, {}, Evaluator::Pipelined, o), naive) << src;
  }
}

TEST(Engine, InvariantUnderPermutation) {
  std::mt19937_64 rng(7);
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) {
    auto lp = cli::loadProgramFile(bp.source.string());
    auto dirs = pathStrings(bp.factDirs);
    std::string expected = evaluateToDump(lp, dirs);
    for (int k = 0; k < 3; ++k) {
      auto permuted = loadChecked(corpus::permuteProgram(lp.source, rng));
      engine::Options o;
      o.workers = 1 << k;
      EXPECT_EQ(evaluateToDump(permuted, dirs, Evaluator::Pipelined, o), expected) << bp.name;
    }
  }
}

TEST(Engine, BatchSizeAndSeedDoNotChangeResult) {
  auto lp = cli::loadProgramFile((corpusRoot() / "symexec" / "symexec.fml").string());
  std::vector<std::string> dirs = {(corpusRoot() / "symexec" / "loop3").string()};
  std::string expected = evaluateToDump(lp, dirs);
  for (std::size_t batch : {2, 7, 64}) {
    engine::Options o;
    o.workers = 3;
    o.batchSize = batch;
    o.seed = batch;
    EXPECT_EQ(evaluateToDump(lp, dirs, Evaluator::Pipelined, o), expected) << batch;
  }
}

TEST(Engine, RuntimeErrorCarriesRuleAndBindings) {
  std::string src = R"(
declare input q(i32, i32).
declare output p(i32).
p(X / Y) :- q(X, Y).
q(4, 2).
q(1, 0).
)";
  auto lp = cli::loadProgram(src);
  for (int w : {1, 4}) {
    engine::Options o;
    o.workers = w;
    try {
      evaluateToDump(lp, {}, Evaluator::Pipelined, o);
      ADD_FAILURE() << "expected DivisionByZero";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DivisionByZero);
      EXPECT_EQ(e.stage(), Stage::Evaluate);
      std::string msg = e.detail();
      EXPECT_NE(msg.find("in rule: p("), std::string::npos) << msg;
      EXPECT_NE(msg.find("Y = 0"), std::string::npos) << msg;
      EXPECT_EQ(e.location().line, 4) << msg;
    }
  }
}

TEST(Engine, StepBudgetAbortsEvaluation) {
  std::string src = R"(
declare fun spin(i32) : i32.
fun spin(N) = spin(N + 1).
declare input q(i32).
declare output p(i32).
p(spin(X)) :- q(X).
q(0).
)";
  auto lp = cli::loadProgram(src);
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::Options fo;
  fo.stepBudget = 10000;
  funceval::FunctionTable fns(lp.source, solver.services(), fo);
  try {
    engine::evaluate(lp.stratified, fns, {});
    ADD_FAILURE() << "expected a budget error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::StepLimitExceeded || e.kind() == ErrorKind::ResourceLimit) << e.what();
  }
}

TEST(Engine, LookupBuildsIndexAndAgreesWithScan) {
  FactDatabase db;
  Symbol r = terms::sym("r3");
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(0, 4);
  for (int n = 0; n < 200; ++n) db.insert(r, {i(d(rng)), i(d(rng)), i(d(rng))});
  EXPECT_EQ(db.indexCount(r), 0u);
  for (engine::PositionMask mask = 1; mask < 8; ++mask) {
    for (int a = 0; a < 5; ++a) {
      std::vector<TermId> key;
      for (int pos = 0; pos < 3; ++pos)
        if (mask & (1u << pos)) key.push_back(i((a + pos) % 5));
      std::set<TermId> expected;
      for (TermId f : db.facts(r)) {
        bool ok = true;
        std::size_t k = 0;
        for (int pos = 0; pos < 3; ++pos)
          if (mask & (1u << pos)) ok &= terms::node(f).args[pos] == key[k++];
        if (ok) expected.insert(f);
      }
      auto got = db.lookup(r, mask, tup(key));
      EXPECT_EQ(std::set<TermId>(got.begin(), got.end()), expected);
    }
  }
  EXPECT_EQ(db.indexCount(r), 7u);
  // Facts added after an index exists are visible through it.
  db.insert(r, {i(9), i(9), i(9)});
  EXPECT_EQ(db.lookup(r, 0b101, tup({i(9), i(9)})).size(), 1u);
}

TEST(Engine, EvaluationUsesIndexes) {
  auto lp = cli::loadProgramFile((corpusRoot() / "tc" / "tc.fml").string());
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());
  FactDatabase db = engine::evaluate(lp.stratified, fns,
                                     cli::loadFactDirs(lp.source, {(corpusRoot() / "tc" / "small").string()}));
  EXPECT_GE(db.indexCount(terms::sym("e")), 1u);
}

TEST(Engine, DuplicateInsertWinsOnce) {
  FactDatabase db;
  Symbol r = terms::sym("dup");
  std::atomic<int> wins{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&] {
      for (int n = 0; n < 500; ++n)
        if (db.insert(r, {i(n)})) ++wins;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(wins.load(), 500);
  EXPECT_EQ(db.size(r), 500u);
}

// A positive program can only gain facts when its input grows.
TEST(Engine, MonotoneInInput) {
  auto lp = cli::loadProgram(kTc);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(0, 9);
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());
  std::vector<std::pair<int, int>> edges;
  std::set<TermId> previous;
  for (int round = 0; round < 6; ++round) {
    for (int n = 0; n < 4; ++n) edges.emplace_back(d(rng), d(rng));
    FactDatabase edb;
    for (auto [a, b] : edges) edb.insert(terms::sym("e"), {i(a), i(b)});
    FactDatabase db = engine::evaluate(lp.stratified, fns, std::move(edb));
    auto now = db.facts(terms::sym("tc"));
    std::set<TermId> current(now.begin(), now.end());
    EXPECT_TRUE(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
    previous = std::move(current);
  }
}

TEST(Engine, StatsCountWork) {
  auto lp = cli::loadProgramFile((corpusRoot() / "tc" / "tc.fml").string());
  engine::Stats stats;
  engine::Options o;
  o.workers = 2;
  evaluateToDump(lp, {(corpusRoot() / "tc" / "small").string()}, Evaluator::Pipelined, o, &stats);
  EXPECT_GT(stats.workItems, 0u);
  EXPECT_GE(stats.derivations, 13u);
}

}  // namespace
