// Acceptance runner. Prints one PASS/FAIL line per criterion. Exits 0 when
// all selected criteria pass, 77 when the only failures are hardware limited
// (reported by ctest as skipped), and 1 otherwise.

#include <CLI11.hpp>

#include <algorithm>
#include <bitset>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

#include "support.hpp"

using namespace fmlog;
using namespace fmlog::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  // Set when every failure is down to the machine (too few hardware
  // threads for a speedup bound) rather than to the implementation.
  bool hardwareLimited = false;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

// Runtime ceilings, in seconds.
constexpr double kLimit1 = 1.0;
constexpr double kLimit2 = 5.0;
constexpr double kLimit3 = 300.0;
constexpr double kLimit5 = 120.0;
constexpr double kLimit6 = 180.0;

// Criterion 5: 8-worker wall time over 1-worker wall time.
constexpr double kMaxParallelRatio = 0.6;
// Criterion 8: visits(n) <= kLinearTolerance * n * visits(1).
constexpr double kLinearTolerance = 2.0;

TermId op(const char* c, std::initializer_list<TermId> args) { return terms::ctor(c, args); }
TermId bvSym(const char* s) { return op("bv32_sym", {terms::store().string(s)}); }
TermId bvConst(std::int32_t v) { return op("bv32_const", {terms::integer(v)}); }

Outcome criterion1() {
  Outcome o;
  auto start = Clock::now();
  cli::RunConfig cfg;
  cfg.programPath = (corpusRoot() / "tree_sum" / "tree_sum.fml").string();
  cfg.dumpRelations = {"tree_sum"};
  std::ostringstream out, err;
  int code = cli::run(cfg, out, err);
  double secs = secondsSince(start);
  o.require(code == 0, "exit " + std::to_string(code) + ": " + err.str());
  o.require(out.str() == readText(corpusRoot() / "tree_sum" / "tree_sum.golden"), "dump differs from golden");
  o.require(secs < kLimit1, "took " + std::to_string(secs) + " s");
  o.note("2 facts, byte-exact, " + std::to_string(secs) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto start = Clock::now();
  TermId z = op("and", {op("bv32_eq", {bvSym("x"), bvConst(42)}),
                        op("bv32_eq", {bvSym("y"), op("bv32_add", {bvSym("x"), bvConst(1)})})});
  TermId zFalse = op("and", {z, terms::ctor("false")});
  std::vector<std::shared_ptr<smt::Backend>> backends = {std::make_shared<smt::BuiltinBackend>()};
  auto external = smt::findExternalSolver();
  o.require(external.has_value(), "no external solver (set FMLOG_SMT_SOLVER or install z3)");
  if (external) backends.push_back(std::make_shared<smt::ExternalBackend>(*external));
  for (auto& b : backends) {
    smt::Solver s(b, false);
    try {
      o.require(s.isSat(z), b->name() + ": is_sat(Z) was false");
      o.require(!s.isSat(zFalse), b->name() + ": is_sat(and(Z, false)) was true");
    } catch (const Error& e) {
      o.require(false, b->name() + ": " + e.what());
    }
  }
  double secs = secondsSince(start);
  o.require(secs < kLimit2, "took " + std::to_string(secs) + " s");
  o.note(std::to_string(backends.size()) + " backend(s), " + std::to_string(secs) + " s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto start = Clock::now();
  std::mt19937_64 rng(3);
  std::size_t runs = 0;
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) {
    auto lp = cli::loadProgramFile(bp.source.string());
    auto dirs = pathStrings(bp.factDirs);
    const std::string reference = evaluateToDump(lp, dirs);
    for (int k = 0; k < 20; ++k) {
      auto permuted = loadChecked(corpus::permuteProgram(lp.source, rng));
      for (int w : {1, 2, 4, 8}) {
        engine::Options opts;
        opts.workers = w;
        opts.seed = static_cast<std::uint64_t>(k * 8 + w);
        ++runs;
        if (evaluateToDump(permuted, dirs, Evaluator::Pipelined, opts) != reference)
          o.require(false, bp.name + " permutation " + std::to_string(k) + " workers " + std::to_string(w));
      }
    }
  }
  double secs = secondsSince(start);
  o.require(secs < kLimit3, "took " + std::to_string(secs) + " s");
  o.note(std::to_string(runs) + " runs identical, " + std::to_string(secs) + " s");
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::size_t mismatches = 0, compared = 0;
  auto compare = [&](const cli::LoadedProgram& lp, const std::vector<std::string>& dirs, const std::string& name) {
    std::string naive = evaluateToDump(lp, dirs, Evaluator::Naive);
    for (int w : {1, 2, 4, 8}) {
      engine::Options opts;
      opts.workers = w;
      ++compared;
      if (evaluateToDump(lp, dirs, Evaluator::Pipelined, opts) != naive) {
        ++mismatches;
        o.require(false, name + " workers " + std::to_string(w));
      }
    }
  };
  std::size_t corpusPrograms = 0;
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) {
    compare(cli::loadProgramFile(bp.source.string()), pathStrings(bp.factDirs), bp.name);
    ++corpusPrograms;
  }
  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    std::string src = corpus::randomDatalogProgram(rng);
    compare(cli::loadProgram(src), {}, "random #" + std::to_string(n));
  }
  o.note(std::to_string(corpusPrograms) + " corpus + 100 random programs, " + std::to_string(compared) +
         " comparisons, " + std::to_string(mismatches) + " mismatches");
  return o;
}

// Reachability by repeated squaring-free closure over bitset rows.
std::vector<std::bitset<200>> matrixClosure(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::bitset<200>> reach(n);
  for (auto [a, b] : edges) reach[a].set(b);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach[i].test(k)) reach[i] |= reach[k];
  return reach;
}

Outcome criterion5() {
  Outcome o;
  auto start = Clock::now();
  const int n = 200;
  const double p = 0.1;
  const std::uint64_t seed = 42;
  fs::path dir = fs::temp_directory_path() / "fmlog_acceptance_tc";
  fs::remove_all(dir);
  std::size_t edgeCount = corpus::writeGraph(dir, n, p, seed);

  auto lp = cli::loadProgramFile((corpusRoot() / "tc" / "tc.fml").string());
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());

  auto timedRun = [&](int workers, engine::FactDatabase* keep) {
    engine::FactDatabase edb = cli::loadFactDirs(lp.source, {dir.string()});
    engine::Options opts;
    opts.workers = workers;
    auto t = Clock::now();
    engine::FactDatabase db = engine::evaluate(lp.stratified, fns, std::move(edb), opts);
    double secs = secondsSince(t);
    if (keep) *keep = std::move(db);
    return secs;
  };

  engine::FactDatabase db;
  timedRun(1, &db);
  auto closure = matrixClosure(n, corpus::generateGraph(n, p, seed));
  std::size_t expected = 0;
  for (const auto& row : closure) expected += row.count();
  bool exact = db.size(terms::sym("tc")) == expected;
  for (TermId f : db.facts(terms::sym("tc"))) {
    const auto& args = terms::node(f).args;
    exact &= closure[terms::node(args[0]).value].test(terms::node(args[1]).value);
  }
  o.require(exact, "tc differs from matrix closure");

  auto median = [&](int workers) {
    std::vector<double> t;
    for (int r = 0; r < 3; ++r) t.push_back(timedRun(workers, nullptr));
    std::sort(t.begin(), t.end());
    return t[1];
  };
  double t1 = median(1);
  double t8 = median(8);
  double ratio = t8 / t1;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu edges, %zu tc facts, t1=%.3f s, t8=%.3f s, ratio %.2f (limit %.2f), %u hardware threads",
                edgeCount, expected, t1, t8, ratio, kMaxParallelRatio, std::thread::hardware_concurrency());
  const bool correct = o.pass;
  o.require(ratio <= kMaxParallelRatio, "parallel ratio " + std::to_string(ratio) + " above limit");
  const unsigned threads = std::thread::hardware_concurrency();
  if (correct && !o.pass && threads < 8) {
    o.hardwareLimited = true;
    o.note("speedup bound needs 8 hardware threads, this machine has " + std::to_string(threads));
  }
  double secs = secondsSince(start);
  o.require(secs < kLimit5, "took " + std::to_string(secs) + " s");
  o.note(buf);
  fs::remove_all(dir);
  return o;
}

// Smallest reach count the loop must produce: every path completes at least
// floor(fuel / 3) iterations of the three-instruction loop, and each
// iteration forks three ways, so sum_{i=1..floor(fuel/3)} 3^i distinct
// states re-enter the loop head.
std::size_t loopLowerBound(int fuel) {
  std::size_t total = 0, layer = 1;
  for (int it = 1; it <= fuel / 3; ++it) total += (layer *= 3);
  return total;
}

Outcome criterion6() {
  Outcome o;
  auto start = Clock::now();
  auto lp = cli::loadProgramFile((corpusRoot() / "symexec" / "symexec.fml").string());
  smt::Solver solver(std::make_shared<smt::BuiltinBackend>());
  funceval::FunctionTable fns(lp.source, solver.services());
  engine::FactDatabase base = cli::loadFactDirs(lp.source, {(corpusRoot() / "symexec" / "loop3").string()});
  corpus::RegisterProgram rp = corpus::registerProgramFromFacts(base);

  std::string counts;
  for (int fuel : {1, 2, 3, 4, 5, 6, 7, 8, 16}) {
    engine::FactDatabase edb = cli::loadFactDirs(lp.source, {(corpusRoot() / "symexec" / "loop3").string()});
    engine::FactDatabase withFuel;
    for (Symbol rel : edb.relations())
      if (terms::symName(rel) != "init_fuel")
        for (TermId f : edb.facts(rel)) withFuel.insertTuple(rel, f);
    withFuel.insert(terms::sym("init_fuel"), std::vector<TermId>{terms::integer(fuel)});
    engine::Options opts;
    opts.workers = 4;
    engine::FactDatabase db;
    try {
      db = engine::evaluate(lp.stratified, fns, std::move(withFuel), opts);
    } catch (const Error& e) {
      o.require(false, "fuel " + std::to_string(fuel) + ": " + e.what());
      continue;
    }
    std::set<corpus::SymState> reach, failed;
    for (TermId f : db.facts(terms::sym("reach"))) reach.insert(corpus::decodeState(f));
    for (TermId f : db.facts(terms::sym("failed_assert"))) failed.insert(corpus::decodeState(f));
    rp.fuel = fuel;
    corpus::OracleResult oracle = corpus::symexecOracle(rp, [&](TermId f) { return solver.isSat(f); });
    std::string at = "fuel " + std::to_string(fuel);
    o.require(db.size(terms::sym("reach")) == oracle.reach.size(), at + ": reach count differs from oracle");
    o.require(reach == oracle.reach, at + ": reach states differ from oracle");
    o.require(failed == oracle.failedAsserts, at + ": failed_assert differs from oracle");
    if (fuel == 8 || fuel == 16) {
      o.require(reach.size() >= loopLowerBound(fuel),
                at + ": only " + std::to_string(reach.size()) + " states, need " + std::to_string(loopLowerBound(fuel)));
      counts += at + ": " + std::to_string(reach.size()) + " states (bound " + std::to_string(loopLowerBound(fuel)) +
                "), " + std::to_string(failed.size()) + " failed asserts; ";
    }
  }
  double secs = secondsSince(start);
  o.require(secs < kLimit6, "took " + std::to_string(secs) + " s");
  o.note(counts + std::to_string(secs) + " s");
  return o;
}

Outcome criterion7() {
  Outcome o;
  smt::BuiltinBackend builtin;
  auto sat = [&](TermId f) { return builtin.checkSat(f) == smt::SatResult::Sat; };
  o.require(!sat(terms::ctor("false")), "is_sat(false)");
  o.require(sat(terms::ctor("true")), "is_sat(true) was false");
  std::mt19937_64 rng(7);
  const std::vector<std::string> symbols = {"x", "y", "z"};
  std::vector<TermId> formulas;
  for (int n = 0; n < 500; ++n) formulas.push_back(corpus::randomFormula(rng, 5, symbols));
  std::vector<smt::SatResult> verdicts;
  std::size_t satCount = 0;
  for (TermId f : formulas) {
    verdicts.push_back(builtin.checkSat(f));
    satCount += verdicts.back() == smt::SatResult::Sat;
  }
  // Anchors on a slice of the same formulas.
  for (std::size_t k = 0; k < 60; ++k) {
    TermId f = formulas[k];
    o.require(!sat(op("and", {f, op("not", {f})})), "and(f, not f) satisfiable for " + terms::render(f));
    o.require(sat(op("or", {f, op("not", {f})})), "or(f, not f) unsatisfiable for " + terms::render(f));
    if (verdicts[k] == smt::SatResult::Sat)
      o.require(sat(op("or", {f, formulas[k + 1]})), "weakening lost satisfiability");
  }
  auto external = smt::findExternalSolver();
  if (external) {
    smt::ExternalBackend ext(*external);
    std::size_t disagreements = 0;
    for (std::size_t k = 0; k < formulas.size(); ++k)
      if (ext.checkSat(formulas[k]) != verdicts[k]) {
        ++disagreements;
        o.require(false, "disagree on " + terms::render(formulas[k]));
      }
    o.note("500 formulas (" + std::to_string(satCount) + " sat), " + std::to_string(disagreements) +
           " disagreements with " + *external);
  } else {
    o.note("500 formulas (" + std::to_string(satCount) + " sat); no external solver, builtin anchors only");
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto visits = [&](int n) -> std::optional<std::size_t> {
    auto [a, b] = chainInstance(n);
    terms::UnifyStats st;
    auto r = terms::unify(a, b, {}, chainReducer, &st);
    if (!r) return std::nullopt;
    for (int i = 0; i <= n + 1; ++i) {
      auto v = r->lookup(terms::sym("X" + std::to_string(i)));
      if (!v || *v != terms::integer(i)) return std::nullopt;
    }
    return st.pairVisits;
  };
  auto base = visits(1);
  o.require(base.has_value(), "n=1 failed");
  if (!base) return o;
  double worst = 0;
  for (int n = 1; n <= 50; ++n) {
    auto v = visits(n);
    if (!v) {
      o.require(false, "unification failed at n=" + std::to_string(n));
      continue;
    }
    double ratio = static_cast<double>(*v) / (static_cast<double>(*base) * n);
    worst = std::max(worst, ratio);
    o.require(ratio <= kLinearTolerance, "n=" + std::to_string(n) + " ratio " + std::to_string(ratio));
  }
  o.note("visits(1)=" + std::to_string(*base) + ", worst visits(n)/(n*visits(1)) = " + std::to_string(worst));
  return o;
}

Outcome criterion9() {
  Outcome o;
  struct Negative {
    const char* file;
    ErrorKind kind;
  };
  for (Negative neg : {Negative{"unbound_head.fml", ErrorKind::UnboundHeadVariable},
                       Negative{"unbound_function_arg.fml", ErrorKind::UnboundFunctionArgument},
                       Negative{"unstratifiable.fml", ErrorKind::UnstratifiableNegation}}) {
    try {
      cli::loadProgramFile((corpusRoot() / "negative" / neg.file).string());
      o.require(false, std::string(neg.file) + " accepted");
    } catch (const Error& e) {
      o.require(e.kind() == neg.kind, std::string(neg.file) + ": got " + std::string(kindName(e.kind())));
    }
  }
  std::size_t rules = 0;
  std::mt19937_64 rng(9);
  for (const auto& bp : corpus::bundledPrograms(corpusRoot())) {
    auto lp = cli::loadProgramFile(bp.source.string());
    // The order as written and a few shuffled orders must all be put into
    // an order where each premise can run given the bindings before it.
    std::vector<validate::StratifiedProgram> variants = {lp.stratified};
    for (int k = 0; k < 5; ++k) variants.push_back(loadChecked(corpus::permuteProgram(lp.source, rng)).stratified);
    for (const auto& sp : variants)
      for (const auto& stratum : sp.rulesByStratum)
        for (const auto& r : stratum) {
          ++rules;
          for (std::size_t k = 0; k < r.body.size(); ++k)
            o.require(validate::evaluable(r.body[k], r.bindingPlan[k]),
                      bp.name + ": premise " + std::to_string(k) + " of " + syntax::prettyPrint(r.head) +
                          " not evaluable");
        }
  }
  o.note("3 negative programs rejected; " + std::to_string(rules) + " ordered rules checked");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number 1-9 (repeatable; default all)")
      ->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  bool onlyHardware = true;
  for (int c : selected) {
    Outcome o;
    try {
      o = criteria[c - 1]();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    all &= o.pass;
    if (!o.pass && !o.hardwareLimited) onlyHardware = false;
  }
  if (all) return 0;
  return onlyHardware ? 77 : 1;
}
