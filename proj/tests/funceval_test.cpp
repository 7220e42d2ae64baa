#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "fmlog/funceval.hpp"
#include "fmlog/types.hpp"

using namespace fmlog;
using namespace fmlog::syntax;
using funceval::FunctionTable;
using terms::Substitution;

namespace {

std::string corpusFile(const std::string& rel) {
  std::ifstream in(std::filesystem::path(FMLOG_SOURCE_DIR) / "corpus" / rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TermId leaf() { return terms::ctor("leaf"); }
TermId node(TermId l, std::int32_t v, TermId r) { return terms::ctor("node", {l, terms::integer(v), r}); }

SourceProgram program(const std::string& src) {
  SourceProgram p = parse(src);
  types::checkProgram(p);
  return p;
}

const char* kListFunctions = R"(
define type ilist = nil | cons(i32, ilist).
declare fun len(ilist) : i32.
fun len(L) = match L with | nil => 0 | cons(_, T) => 1 + len(T) end.
declare fun upto(i32) : ilist.
fun upto(N) = if N <= 0 then nil else cons(N, upto(N - 1)).
declare fun take(i32, ilist) : ilist.
fun take(N, L) =
    if N <= 0 then nil
    else match L with | nil => nil | cons(H, T) => cons(H, take(N - 1, T)) end.
declare fun first(ilist, ilist) : i32.
fun first(A, B) = match A with | cons(H, _) => H | nil => 0 end.
declare fun loop(i32) : i32.
fun loop(N) = loop(N + 1).
declare fun fib(i32) : i32.
fun fib(N) = if N < 2 then N else fib(N - 1) + fib(N - 2).
declare fun pick(i32) : string.
fun pick(N) =
    let (A, B) = (N * 2, N + 1) in
    match A % 3 with
    | 0 => string_concat("zero:", i32_to_string(B))
    | 1 => "one"
    | _ => i32_to_string(A / 3)
    end.
)";

// Call-by-name evaluator used as an independent oracle. Function arguments
// are passed as unevaluated thunks and forced only when a match needs them.
class LazyEvaluator {
 public:
  explicit LazyEvaluator(const SourceProgram& p) {
    for (const FuncDef& f : p.funcDefs) fns_[f.name] = {f.params, desugar(f.body)};
  }

  TermId call(Symbol fn, const std::vector<TermId>& groundArgs) {
    Env env = std::make_shared<std::map<Symbol, Thunk>>();
    std::vector<Thunk> args;
    for (TermId a : groundArgs) args.push_back(Thunk{a, env, nullptr});
    return force(invoke(fn, args));
  }

 private:
  struct Thunk;
  using Env = std::shared_ptr<std::map<Symbol, Thunk>>;
  struct Thunk {
    TermId term;
    Env env;
    std::shared_ptr<const Expr> expr;  // set when the thunk is an expression
  };
  struct Fn {
    std::vector<Symbol> params;
    ExprPtr body;
  };

  Thunk invoke(Symbol fn, const std::vector<Thunk>& args) {
    const Fn& f = fns_.at(fn);
    Env env = std::make_shared<std::map<Symbol, Thunk>>();
    for (std::size_t i = 0; i < args.size(); ++i) (*env)[f.params[i]] = args[i];
    return Thunk{kNoTerm, env, f.body};
  }

  // Fully evaluates a thunk to a ground term.
  TermId force(const Thunk& th) {
    if (th.expr) return forceExpr(*th.expr, th.env);
    return forceTerm(th.term, th.env);
  }

  TermId forceExpr(const Expr& e, const Env& env) {
    if (e.kind == Expr::Kind::Term) return forceTerm(e.term, env);
    TermId v = forceExpr(*e.scrutinee, env);
    for (const MatchBranch& b : e.branches) {
      auto s = funceval::matchPattern(b.pattern, v);
      if (!s) continue;
      Env inner = std::make_shared<std::map<Symbol, Thunk>>(*env);
      for (auto [var, val] : s->entries()) (*inner)[var] = Thunk{val, nullptr, nullptr};
      return forceExpr(*b.body, inner);
    }
    throw Error(ErrorKind::MatchFailure, "lazy: no match");
  }

  TermId forceTerm(TermId t, const Env& env) {
    const TermNode& n = terms::node(t);
    if (n.ground) return t;
    if (n.kind == TermKind::Var) return force(env->at(n.sym));
    if (n.kind == TermKind::Call) {
      const std::string& name = terms::symName(n.sym);
      if (findBuiltin(name)) {
        std::vector<TermId> args;
        for (TermId a : n.args) args.push_back(forceTerm(a, env));
        return builtins_.call(n.sym, args);
      }
      std::vector<Thunk> args;
      for (TermId a : n.args) args.push_back(Thunk{a, env, nullptr});
      return force(invoke(n.sym, args));
    }
    std::vector<TermId> args;
    for (TermId a : n.args) args.push_back(forceTerm(a, env));
    return terms::store().withArgs(t, args);
  }

  std::map<Symbol, Fn> fns_;
  SourceProgram empty_;
  FunctionTable builtins_{empty_};
};

}  // namespace

TEST(Reduce, TreeSumExamples) {
  SourceProgram p = program(corpusFile("tree_sum/tree_sum.fml"));
  FunctionTable fns(p);
  Symbol sum = terms::sym("sum");
  EXPECT_EQ(fns.call(sum, {node(leaf(), 42, leaf())}), terms::integer(42));
  EXPECT_EQ(fns.call(sum, {leaf()}), terms::integer(0));
  EXPECT_EQ(fns.call(sum, {node(node(leaf(), 1, leaf()), 3, node(leaf(), 5, leaf()))}), terms::integer(9));
  EXPECT_EQ(fns.reduce(terms::call("sum", {leaf()})), terms::integer(0));
}

TEST(Reduce, LetIfAndStrings) {
  FunctionTable fns(program(kListFunctions));
  EXPECT_EQ(fns.call(terms::sym("len"), {fns.call(terms::sym("upto"), {terms::integer(10)})}), terms::integer(10));
  EXPECT_EQ(fns.call(terms::sym("pick"), {terms::integer(3)}), terms::str("zero:4"));
  EXPECT_EQ(fns.call(terms::sym("pick"), {terms::integer(2)}), terms::str("one"));
  EXPECT_EQ(fns.call(terms::sym("pick"), {terms::integer(1)}), terms::str("0"));
  EXPECT_EQ(fns.call(terms::sym("fib"), {terms::integer(15)}), terms::integer(610));
}

TEST(Reduce, MatchFailure) {
  SourceProgram p = program(
      "declare fun unwrap(i32 option) : i32.\nfun unwrap(O) = let some(X) = O in X.\n");
  FunctionTable fns(p);
  EXPECT_EQ(fns.call(terms::sym("unwrap"), {terms::ctor("some", {terms::integer(3)})}), terms::integer(3));
  try {
    fns.call(terms::sym("unwrap"), {terms::ctor("none")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MatchFailure);
  }
}

TEST(Reduce, StepBudget) {
  funceval::Options opts;
  opts.stepBudget = 10'000;
  opts.maxDepth = 1'000'000;
  FunctionTable fns(program(kListFunctions), {}, opts);
  try {
    fns.call(terms::sym("loop"), {terms::integer(0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepLimitExceeded);
  }
  // The budget is per top-level reduction, so an unrelated call still works.
  EXPECT_EQ(fns.call(terms::sym("fib"), {terms::integer(10)}), terms::integer(55));
}

TEST(Reduce, DepthGuard) {
  funceval::Options opts;
  opts.maxDepth = 500;
  FunctionTable fns(program(kListFunctions), {}, opts);
  EXPECT_THROW(fns.call(terms::sym("upto"), {terms::integer(100000)}), Error);
  EXPECT_NO_THROW(fns.call(terms::sym("upto"), {terms::integer(100)}));
}

TEST(Builtins, ArithmeticWraps) {
  SourceProgram empty;
  FunctionTable fns(empty);
  auto op = [&](const char* o, std::int32_t a, std::int32_t b) {
    return terms::node(fns.call(terms::sym(o), {terms::integer(a), terms::integer(b)})).value;
  };
  EXPECT_EQ(op("+", INT32_MAX, 1), INT32_MIN);
  EXPECT_EQ(op("-", INT32_MIN, 1), INT32_MAX);
  EXPECT_EQ(op("*", 65536, 65536), 0);
  EXPECT_EQ(op("/", -7, 2), -3);
  EXPECT_EQ(op("%", -7, 2), -1);
  EXPECT_EQ(op("/", INT32_MIN, -1), INT32_MIN);
  EXPECT_EQ(op("%", INT32_MIN, -1), 0);
  std::mt19937 rng(1);
  for (int i = 0; i < 10000; ++i) {
    auto a = static_cast<std::int32_t>(rng());
    auto b = static_cast<std::int32_t>(rng());
    EXPECT_EQ(op("-", op("+", a, b), b), a);
  }
}

TEST(Builtins, DivisionByZero) {
  SourceProgram empty;
  FunctionTable fns(empty);
  for (const char* o : {"/", "%"}) {
    try {
      fns.call(terms::sym(o), {terms::integer(1), terms::integer(0)});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DivisionByZero);
    }
  }
}

TEST(Builtins, EqualityAndComparisons) {
  EXPECT_TRUE(funceval::builtinEq(terms::str("x"), terms::str("x")));
  EXPECT_FALSE(funceval::builtinEq(terms::ctor("bv32_sym", {terms::str("x")}), terms::ctor("bv32_sym", {terms::str("y")})));
  EXPECT_TRUE(funceval::builtinEq(terms::integer(42), terms::integer(42)));
  SourceProgram empty;
  FunctionTable fns(empty);
  EXPECT_EQ(fns.call(terms::sym("=="), {terms::str("x"), terms::str("x")}), trueTerm());
  EXPECT_EQ(fns.call(terms::sym("!="), {terms::str("x"), terms::str("x")}), falseTerm());
  EXPECT_EQ(fns.call(terms::sym("<="), {terms::integer(3), terms::integer(3)}), trueTerm());
  EXPECT_EQ(fns.call(terms::sym(">"), {terms::integer(3), terms::integer(3)}), falseTerm());
}

TEST(Builtins, MapGetReturnsFirstBinding) {
  SourceProgram empty;
  FunctionTable fns(empty);
  TermId m = terms::ctor("mnil");
  m = fns.call(terms::sym("put"), {terms::str("a"), terms::integer(1), m});
  m = fns.call(terms::sym("put"), {terms::str("b"), terms::integer(2), m});
  m = fns.call(terms::sym("put"), {terms::str("a"), terms::integer(3), m});
  EXPECT_EQ(terms::render(m), "mcons(\"a\", 3, mcons(\"b\", 2, mcons(\"a\", 1, mnil)))");
  EXPECT_EQ(fns.call(terms::sym("get"), {terms::str("a"), m}), terms::ctor("some", {terms::integer(3)}));
  EXPECT_EQ(fns.call(terms::sym("get"), {terms::str("b"), m}), terms::ctor("some", {terms::integer(2)}));
  EXPECT_EQ(fns.call(terms::sym("get"), {terms::str("c"), m}), terms::ctor("none"));
}

TEST(Builtins, SolverHooks) {
  SourceProgram empty;
  FunctionTable none(empty);
  try {
    none.call(terms::sym("interpolant"), {trueTerm(), falseTerm()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedOperation);
  }
  EXPECT_THROW(none.call(terms::sym("is_sat"), {trueTerm()}), Error);
  funceval::Services services;
  services.isSat = [](TermId f) { return f == trueTerm(); };
  FunctionTable withSolver(empty, services);
  EXPECT_EQ(withSolver.call(terms::sym("is_sat"), {trueTerm()}), trueTerm());
  EXPECT_EQ(withSolver.call(terms::sym("is_sat"), {falseTerm()}), falseTerm());
}

TEST(MatchPattern, Examples) {
  auto s = funceval::matchPattern(terms::ctor("node", {terms::var("L"), terms::var("V"), terms::var("R")}),
                                  node(leaf(), 42, leaf()));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->lookup(terms::sym("L")), leaf());
  EXPECT_EQ(s->lookup(terms::sym("V")), terms::integer(42));
  EXPECT_EQ(s->lookup(terms::sym("R")), leaf());
  EXPECT_FALSE(funceval::matchPattern(leaf(), node(leaf(), 0, leaf())));
  TermId t = node(leaf(), 7, leaf());
  auto all = funceval::matchPattern(terms::var("X"), t);
  ASSERT_TRUE(all);
  EXPECT_EQ(all->lookup(terms::sym("X")), t);
}

TEST(CallCache, ServesRepeatedCalls) {
  SourceProgram p = program(corpusFile("tree_sum/tree_sum.fml"));
  FunctionTable fns(p);
  TermId t = node(node(leaf(), 1, leaf()), 3, node(leaf(), 5, leaf()));
  TermId first = fns.call(terms::sym("sum"), {t});
  std::uint64_t hitsBefore = fns.cacheHits();
  TermId second = fns.call(terms::sym("sum"), {t});
  EXPECT_EQ(first, second);
  EXPECT_EQ(fns.cacheHits(), hitsBefore + 1);
}

TEST(CallCache, ZeroCapacityBehavesAsOff) {
  funceval::Options off;
  off.cacheCapacity = 0;
  FunctionTable uncached(program(kListFunctions), {}, off);
  FunctionTable cached(program(kListFunctions));
  for (int n = 0; n < 20; ++n) {
    EXPECT_EQ(uncached.call(terms::sym("fib"), {terms::integer(n)}), cached.call(terms::sym("fib"), {terms::integer(n)}));
  }
  EXPECT_EQ(uncached.cacheSize(), 0u);
  EXPECT_EQ(uncached.cacheHits(), 0u);
  EXPECT_GT(cached.cacheHits(), 0u);
}

TEST(CallCache, CapacityIsRespected) {
  funceval::Options small;
  small.cacheCapacity = 64;
  FunctionTable fns(program(kListFunctions), {}, small);
  for (int n = 0; n < 200; ++n) fns.call(terms::sym("upto"), {terms::integer(n)});
  EXPECT_LE(fns.cacheSize(), 64u + 32u);
}

TEST(Purity, RepeatedCallsAgree) {
  FunctionTable fns(program(kListFunctions));
  for (int n = 0; n < 30; ++n) {
    TermId a = fns.call(terms::sym("upto"), {terms::integer(n)});
    TermId b = fns.call(terms::sym("upto"), {terms::integer(n)});
    EXPECT_EQ(a, b);
  }
}

TEST(StrategyIndependence, LazyOracleAgrees) {
  SourceProgram p = program(kListFunctions);
  funceval::Options off;
  off.cacheCapacity = 0;
  FunctionTable eager(p, {}, off);
  LazyEvaluator lazy(p);
  for (int n = -2; n < 12; ++n) {
    TermId l = eager.call(terms::sym("upto"), {terms::integer(n)});
    EXPECT_EQ(lazy.call(terms::sym("upto"), {terms::integer(n)}), l);
    EXPECT_EQ(lazy.call(terms::sym("len"), {l}), eager.call(terms::sym("len"), {l}));
    EXPECT_EQ(lazy.call(terms::sym("take"), {terms::integer(3), l}), eager.call(terms::sym("take"), {terms::integer(3), l}));
    EXPECT_EQ(lazy.call(terms::sym("pick"), {terms::integer(n)}), eager.call(terms::sym("pick"), {terms::integer(n)}));
    EXPECT_EQ(lazy.call(terms::sym("fib"), {terms::integer(n)}), eager.call(terms::sym("fib"), {terms::integer(n)}));
  }
  SourceProgram tree = program(corpusFile("tree_sum/tree_sum.fml"));
  FunctionTable eagerTree(tree);
  LazyEvaluator lazyTree(tree);
  TermId t = node(node(leaf(), 1, leaf()), 3, node(leaf(), 5, leaf()));
  EXPECT_EQ(lazyTree.call(terms::sym("sum"), {t}), eagerTree.call(terms::sym("sum"), {t}));
}

TEST(StrategyIndependence, SymexecFunctions) {
  SourceProgram p = program(corpusFile("symexec/symexec.fml"));
  FunctionTable eager(p);
  LazyEvaluator lazy(p);
  TermId store = terms::ctor("mcons", {terms::str("x"), terms::ctor("bv32_sym", {terms::str("x")}), terms::ctor("mnil")});
  TermId state = terms::tuple({store, trueTerm(), terms::integer(0), terms::integer(3)});
  std::vector<TermId> insts = {
      terms::ctor("inst_havoc", {terms::str("y")}),
      terms::ctor("inst_const", {terms::str("y"), terms::integer(7)}),
      terms::ctor("inst_binop", {terms::ctor("op_add"), terms::str("z"), terms::str("x"), terms::str("x")}),
      terms::ctor("inst_fail"),
  };
  for (TermId inst : insts) {
    std::vector<TermId> args = {terms::integer(4), inst, state};
    EXPECT_EQ(lazy.call(terms::sym("exec_inst"), args), eager.call(terms::sym("exec_inst"), args));
  }
  TermId havoc = eager.call(terms::sym("exec_inst"), {terms::integer(4), insts[0], state});
  EXPECT_NE(terms::render(havoc).find("bv32_sym(\"sym_4_0\")"), std::string::npos);
  EXPECT_EQ(eager.call(terms::sym("decr_fuel"), {terms::tuple({store, trueTerm(), terms::integer(0), terms::integer(0)})}),
            terms::ctor("none"));
}
