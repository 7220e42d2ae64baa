#pragma once

// Well-formedness checks and the rewriting stage that puts rule bodies in
// an order that can be evaluated left to right.

#include <map>
#include <vector>

#include "fmlog/syntax.hpp"

namespace fmlog::validate {

struct OrderedRule {
  syntax::Atom head;
  std::vector<syntax::Premise> body;
  // bindingPlan[i] holds the variables bound before body[i] runs (sorted);
  // bindingPlan[body.size()] is the set bound after the whole body.
  std::vector<std::vector<Symbol>> bindingPlan;
  // Position of each premise in the clause as written.
  std::vector<std::size_t> originalIndex;
  Location loc;
};

struct StratifiedProgram {
  // Relations of each stratum, lowest first. Input relations are in none.
  std::vector<std::vector<Symbol>> strata;
  std::vector<std::vector<OrderedRule>> rulesByStratum;
  // Clauses with an empty body, in source order.
  std::vector<syntax::Clause> facts;
  std::map<Symbol, int> stratumOf;
};

/// Variables bound once `premises` have all run, starting from `bound`.
/// Premises are applied in whatever order makes progress.
std::vector<Symbol> boundClosure(const std::vector<syntax::Premise>& premises, std::vector<Symbol> bound = {});

/// True if premise `p` can run with exactly the variables in `bound` bound
/// (sorted). On success `after` receives the variables bound afterwards.
bool evaluable(const syntax::Premise& p, const std::vector<Symbol>& bound, std::vector<Symbol>* after = nullptr);

/// Throws UnboundHeadVariable naming the first head variable the body
/// cannot bind.
void checkRangeRestriction(const syntax::Clause& c);

/// Throws UnboundFunctionArgument for a variable that occurs only inside
/// function-call arguments.
void checkFunctionBinding(const syntax::Clause& c);

/// Throws NonLinearPattern if a match or let pattern repeats a variable.
void checkPatterns(const syntax::SourceProgram& p);

/// Orders the body so that every premise is evaluable when reached. Among
/// valid orders picks the lexicographically least in original positions.
/// Throws NoValidOrder.
OrderedRule reorderPremises(const syntax::Clause& c);

/// Minimal stratification of the output relations; rules are reordered.
/// Throws UnstratifiableNegation or InputRelationRule.
StratifiedProgram stratify(const syntax::SourceProgram& p);

/// All of the above, in order.
StratifiedProgram validateProgram(const syntax::SourceProgram& p);

}  // namespace fmlog::validate
