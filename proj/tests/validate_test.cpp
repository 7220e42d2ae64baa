#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fmlog/types.hpp"
#include "fmlog/validate.hpp"

using namespace fmlog;
using namespace fmlog::syntax;
using namespace fmlog::validate;

namespace {

std::string corpusFile(const std::string& rel) {
  std::ifstream in(std::filesystem::path(FMLOG_SOURCE_DIR) / "corpus" / rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kDecls =
    "define type 'A tree = leaf | node('A tree, 'A, 'A tree).\n"
    "declare fun sum(i32 tree) : i32.\n"
    "fun sum(Tree) = match Tree with | leaf => 0 | node(L, V, R) => V + sum(L) + sum(R) end.\n"
    "declare fun f(i32) : i32.\nfun f(X) = X + 1.\n"
    "declare fun g(i32) : i32.\nfun g(X) = X * 2.\n"
    "declare input q(i32).\n"
    "declare input r(i32).\n"
    "declare input e(i32).\n"
    "declare input num_tree(i32 tree).\n"
    "declare output p(i32).\n"
    "declare output s(i32).\n"
    "declare output tree_sum(i32 tree, i32).\n";

Clause lastClause(const std::string& extra) {
  SourceProgram p = parse(kDecls + extra);
  types::checkProgram(p);
  return p.clauses.back();
}

ErrorKind validateKind(const std::string& src) {
  try {
    SourceProgram p = parse(src);
    types::checkProgram(p);
    validateProgram(p);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;  // no error
}

std::string orderOf(const OrderedRule& r) {
  std::string s;
  for (const Premise& p : r.body) s += (s.empty() ? "" : "; ") + prettyPrint(p);
  return s;
}

std::vector<std::string> names(const std::vector<Symbol>& syms) {
  std::vector<std::string> out;
  for (Symbol s : syms) out.push_back(terms::symName(s));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(RangeRestriction, Examples) {
  EXPECT_NO_THROW(checkRangeRestriction(lastClause("p(X) :- q(X).")));
  try {
    checkRangeRestriction(lastClause("p(X) :- q(Y)."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundHeadVariable);
    EXPECT_NE(e.detail().find("X"), std::string::npos);
  }
  EXPECT_NO_THROW(checkRangeRestriction(lastClause("tree_sum(Tree, Sum) :- num_tree(Tree), sum(Tree) = Sum.")));
}

TEST(RangeRestriction, NegationDoesNotBind) {
  EXPECT_THROW(checkRangeRestriction(lastClause("p(X) :- q(Y), !r(X).")), Error);
}

TEST(RangeRestriction, NonGroundFactRejected) {
  EXPECT_EQ(validateKind(kDecls + "p(X)."), ErrorKind::UnboundHeadVariable);
  EXPECT_EQ(validateKind(kDecls + "p(f(3))."), ErrorKind::IoError);
}

TEST(FunctionBinding, Examples) {
  try {
    checkFunctionBinding(lastClause("p(Y) :- sum(X) = Y."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundFunctionArgument);
    EXPECT_NE(e.detail().find("X"), std::string::npos);
  }
  EXPECT_NO_THROW(checkFunctionBinding(lastClause("tree_sum(X, Y) :- num_tree(X), sum(X) = Y.")));
  EXPECT_NO_THROW(checkFunctionBinding(lastClause("p(Y) :- q(X), f(g(X)) = Y.")));
}

TEST(Stratify, NegativeEdgeForcesTwoStrata) {
  SourceProgram p = parse(
      "declare input e(i32).\ndeclare input f(i32).\n"
      "declare output p(i32).\ndeclare output q(i32).\n"
      "p(X) :- e(X), !q(X).\nq(X) :- f(X).\n");
  StratifiedProgram s = stratify(p);
  ASSERT_EQ(s.strata.size(), 2u);
  EXPECT_EQ(names(s.strata[0]), std::vector<std::string>{"q"});
  EXPECT_EQ(names(s.strata[1]), std::vector<std::string>{"p"});
  EXPECT_EQ(s.rulesByStratum[0].size(), 1u);
  EXPECT_EQ(s.rulesByStratum[1].size(), 1u);
}

TEST(Stratify, SelfNegationRejected) {
  try {
    stratify(parse("declare input e(i32).\ndeclare output p(i32).\np(X) :- e(X), !p(X).\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnstratifiableNegation);
    EXPECT_NE(e.detail().find("[p]"), std::string::npos);
  }
}

TEST(Stratify, SymexecIsOneStratum) {
  StratifiedProgram s = stratify(parse(corpusFile("symexec/symexec.fml")));
  ASSERT_EQ(s.strata.size(), 1u);
  EXPECT_EQ(names(s.strata[0]), (std::vector<std::string>{"failed_assert", "reach", "step_to"}));
}

TEST(Stratify, StrataCorpusHasThreeLevels) {
  StratifiedProgram s = stratify(parse(corpusFile("strata/strata.fml")));
  ASSERT_EQ(s.strata.size(), 3u);
  EXPECT_EQ(names(s.strata[0]), (std::vector<std::string>{"reached", "vertex"}));
  EXPECT_EQ(names(s.strata[1]), std::vector<std::string>{"unreached"});
  EXPECT_EQ(names(s.strata[2]), std::vector<std::string>{"label"});
}

TEST(Stratify, MinimalAndConsistentOnCorpus) {
  for (const char* rel : {"tree_sum/tree_sum.fml", "tc/tc.fml", "symexec/symexec.fml", "strata/strata.fml"}) {
    SourceProgram p = parse(corpusFile(rel));
    StratifiedProgram s = stratify(p);
    for (const Clause& c : p.clauses) {
      if (c.isFact()) continue;
      int h = s.stratumOf.at(c.head.relation);
      for (const Premise& pr : c.body) {
        if (pr.kind == Premise::Kind::Unify || !s.stratumOf.count(pr.atom.relation)) continue;
        int d = s.stratumOf.at(pr.atom.relation);
        if (pr.kind == Premise::Kind::Negated) {
          EXPECT_LT(d, h) << rel;
        } else {
          EXPECT_LE(d, h) << rel;
        }
      }
    }
    // Minimality: every non-empty stratum above 0 is forced by a negation.
    for (std::size_t i = 1; i < s.strata.size(); ++i) EXPECT_FALSE(s.strata[i].empty()) << rel;
  }
}

TEST(Stratify, RuleForInputRelationRejected) {
  EXPECT_EQ(validateKind("declare input e(i32).\ndeclare input f(i32).\ne(X) :- f(X).\n"),
            ErrorKind::InputRelationRule);
}

TEST(Reorder, FunctionNeedsBinding) {
  OrderedRule r = reorderPremises(lastClause("tree_sum(T, S) :- sum(T) = S, num_tree(T)."));
  EXPECT_EQ(orderOf(r), "num_tree(T); sum(T) = S");
  EXPECT_EQ(r.originalIndex, (std::vector<std::size_t>{1, 0}));
  EXPECT_TRUE(r.bindingPlan[0].empty());
  EXPECT_EQ(names(r.bindingPlan[1]), std::vector<std::string>{"T"});
  EXPECT_EQ(names(r.bindingPlan[2]), (std::vector<std::string>{"S", "T"}));
}

TEST(Reorder, NegationNeedsBinding) {
  OrderedRule r = reorderPremises(lastClause("p(X) :- !r(X), q(X)."));
  EXPECT_EQ(orderOf(r), "q(X); !r(X)");
}

TEST(Reorder, SymexecStepRuleUnchanged) {
  SourceProgram p = parse(corpusFile("symexec/symexec.fml"));
  const Clause* stepRule = nullptr;
  for (const Clause& c : p.clauses)
    if (terms::symName(c.head.relation) == "step_to" && c.body.size() == 4) stepRule = &c;
  ASSERT_NE(stepRule, nullptr);
  OrderedRule r = reorderPremises(*stepRule);
  EXPECT_EQ(r.originalIndex, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Reorder, LexicographicallyLeastValidOrder) {
  OrderedRule r = reorderPremises(lastClause("p(Y) :- f(X) = Y, e(Z), q(X), r(Z)."));
  EXPECT_EQ(r.originalIndex, (std::vector<std::size_t>{1, 2, 0, 3}));
}

TEST(Reorder, NoValidOrderForUnsafeNegation) {
  try {
    reorderPremises(lastClause("p(X) :- q(X), !r(Y)."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoValidOrder);
  }
}

// Replays each plan independently of the simulator: variables inside calls
// and under negation must already be bound, and every non-negated premise
// binds its remaining variables.
TEST(Reorder, BindingPlansReplayOnCorpus) {
  for (const char* rel : {"tree_sum/tree_sum.fml", "tc/tc.fml", "symexec/symexec.fml", "strata/strata.fml"}) {
    SourceProgram p = parse(corpusFile(rel));
    StratifiedProgram s = validateProgram(p);
    for (const auto& stratum : s.rulesByStratum) {
      for (const OrderedRule& r : stratum) {
        ASSERT_EQ(r.bindingPlan.size(), r.body.size() + 1);
        for (std::size_t i = 0; i < r.body.size(); ++i) {
          const Premise& pr = r.body[i];
          std::vector<TermId> ts;
          if (pr.kind == Premise::Kind::Unify) {
            ts = {pr.lhs, pr.rhs};
          } else {
            ts = pr.atom.args;
          }
          std::vector<Symbol> callVars, plainVars, all;
          for (TermId t : ts) {
            terms::collectCallVars(t, callVars);
            terms::collectNonCallVars(t, plainVars);
            terms::collectVars(t, all);
          }
          const auto& plan = r.bindingPlan[i];
          auto inPlan = [&](Symbol v) { return std::binary_search(plan.begin(), plan.end(), v); };
          if (pr.kind == Premise::Kind::Negated) {
            for (Symbol v : all) EXPECT_TRUE(inPlan(v)) << rel;
            continue;
          }
          for (Symbol v : callVars)
            EXPECT_TRUE(inPlan(v) || std::find(plainVars.begin(), plainVars.end(), v) != plainVars.end()) << rel;
          const auto& next = r.bindingPlan[i + 1];
          for (Symbol v : all) EXPECT_TRUE(std::binary_search(next.begin(), next.end(), v)) << rel;
        }
        std::vector<Symbol> hv;
        for (TermId t : r.head.args) terms::collectVars(t, hv);
        for (Symbol v : hv) EXPECT_TRUE(std::binary_search(r.bindingPlan.back().begin(), r.bindingPlan.back().end(), v));
      }
    }
  }
}

TEST(Patterns, NonLinearRejected) {
  EXPECT_EQ(validateKind("declare fun same((i32 * i32)) : bool.\n"
                         "fun same(P) = match P with | (X, X) => true | _ => false end.\n"),
            ErrorKind::NonLinearPattern);
}

TEST(NegativeCorpus, EachRestrictionHasItsCategory) {
  EXPECT_EQ(validateKind(corpusFile("negative/unbound_head.fml")), ErrorKind::UnboundHeadVariable);
  EXPECT_EQ(validateKind(corpusFile("negative/unbound_function_arg.fml")), ErrorKind::UnboundFunctionArgument);
  EXPECT_EQ(validateKind(corpusFile("negative/unstratifiable.fml")), ErrorKind::UnstratifiableNegation);
}
