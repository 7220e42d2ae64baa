#include "fmlog/engine.hpp"

namespace fmlog::engine {

using syntax::Premise;
using terms::Substitution;

// Every round joins each rule against full scans of the database and only
// then inserts what it derived, until a round adds nothing.
FactDatabase naiveEvaluate(const validate::StratifiedProgram& p, const funceval::FunctionTable& fns,
                           FactDatabase edb) {
  FactDatabase db = std::move(edb);
  terms::Reducer reduce = fns.reducer();
  for (const syntax::Clause& c : p.facts) {
    std::vector<TermId> args;
    for (TermId a : c.head.args) args.push_back(evalGround(a, fns));
    db.insert(c.head.relation, args);
  }
  auto groundTuple = [&](const std::vector<TermId>& args, const Substitution& s) {
    std::vector<TermId> out;
    for (TermId a : args) out.push_back(evalGround(terms::apply(s, a), fns));
    return terms::store().tuple(out);
  };

  for (const auto& rules : p.rulesByStratum) {
    bool changed = true;
    while (changed) {
      std::vector<std::pair<Symbol, TermId>> derived;
      for (const validate::OrderedRule& r : rules) {
        std::vector<Substitution> partial(1);
        for (const Premise& pr : r.body) {
          std::vector<Substitution> next;
          for (const Substitution& s : partial) {
            switch (pr.kind) {
              case Premise::Kind::Positive: {
                TermId pattern = terms::store().tuple(pr.atom.args);
                for (TermId fact : db.facts(pr.atom.relation))
                  if (auto u = terms::unify(pattern, fact, s, reduce)) next.push_back(std::move(*u));
                break;
              }
              case Premise::Kind::Negated:
                if (!db.contains(pr.atom.relation, groundTuple(pr.atom.args, s))) next.push_back(s);
                break;
              case Premise::Kind::Unify:
                if (auto u = terms::unify(pr.lhs, pr.rhs, s, reduce)) next.push_back(std::move(*u));
                break;
            }
          }
          partial = std::move(next);
        }
        for (const Substitution& s : partial) derived.emplace_back(r.head.relation, groundTuple(r.head.args, s));
      }
      changed = false;
      for (auto [rel, t] : derived) changed |= db.insertTuple(rel, t);
    }
  }
  return db;
}

}  // namespace fmlog::engine
