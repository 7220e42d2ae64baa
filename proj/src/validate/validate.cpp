#include <algorithm>
#include <functional>
#include <set>

#include "fmlog/validate.hpp"

namespace fmlog::validate {

using syntax::Clause;
using syntax::Premise;
using syntax::SourceProgram;

namespace {

// Stands for "some ground value" on one side of a simulated unification.
constexpr TermId kKnown = kNoTerm;

using VarSet = std::set<Symbol>;

bool known(TermId t, const VarSet& bound) {
  if (t == kKnown) return true;
  std::vector<Symbol> vs;
  terms::collectVars(t, vs);
  return std::all_of(vs.begin(), vs.end(), [&](Symbol v) { return bound.count(v) > 0; });
}

// Abstract version of terms::unify: tracks which variables become bound
// without knowing their values. Returns false if some pair stays blocked.
bool simulate(std::vector<std::pair<TermId, TermId>> pending, VarSet& bound) {
  bool progress = true;
  while (!pending.empty() && progress) {
    progress = false;
    std::vector<std::pair<TermId, TermId>> next;
    for (auto [a, b] : pending) {
      bool ka = known(a, bound);
      bool kb = known(b, bound);
      if (ka && kb) {
        progress = true;
        continue;
      }
      if (ka || kb) {
        TermId other = ka ? b : a;
        const TermNode& n = terms::node(other);
        if (n.kind == TermKind::Var) {
          bound.insert(n.sym);
          progress = true;
        } else if (n.kind == TermKind::Ctor || n.kind == TermKind::Tuple) {
          for (TermId c : n.args) next.emplace_back(kKnown, c);
          progress = true;
        } else {
          next.emplace_back(a, b);  // a call whose arguments are not bound yet
        }
        continue;
      }
      const TermNode& na = terms::node(a);
      const TermNode& nb = terms::node(b);
      bool sa = na.kind == TermKind::Ctor || na.kind == TermKind::Tuple;
      bool sb = nb.kind == TermKind::Ctor || nb.kind == TermKind::Tuple;
      if (sa && sb) {
        progress = true;
        // A head clash means the premise always fails, which binds nothing
        // new but is still evaluable.
        if (na.kind == nb.kind && na.sym == nb.sym && na.args.size() == nb.args.size())
          for (std::size_t i = 0; i < na.args.size(); ++i) next.emplace_back(na.args[i], nb.args[i]);
        continue;
      }
      next.emplace_back(a, b);
    }
    pending = std::move(next);
  }
  return pending.empty();
}

std::vector<Symbol> atomVars(const syntax::Atom& a) {
  std::vector<Symbol> vs;
  for (TermId t : a.args) terms::collectVars(t, vs);
  return vs;
}

std::vector<Symbol> headVars(const Clause& c) { return atomVars(c.head); }

[[noreturn]] void failUnboundHead(const Clause& c, Symbol v) {
  std::string name = terms::symName(v);
  if (name.rfind(syntax::kAnonPrefix, 0) == 0) name = "_";
  throw Error(ErrorKind::UnboundHeadVariable,
              "head variable " + name + " of " + terms::symName(c.head.relation) + " is not bound by the body", c.loc);
}

}  // namespace

bool evaluable(const Premise& p, const std::vector<Symbol>& boundIn, std::vector<Symbol>* after) {
  VarSet bound(boundIn.begin(), boundIn.end());
  bool ok;
  switch (p.kind) {
    case Premise::Kind::Negated: {
      std::vector<Symbol> vs = atomVars(p.atom);
      ok = std::all_of(vs.begin(), vs.end(), [&](Symbol v) { return bound.count(v) > 0; });
      break;
    }
    case Premise::Kind::Positive: {
      std::vector<std::pair<TermId, TermId>> pairs;
      for (TermId t : p.atom.args) pairs.emplace_back(kKnown, t);
      ok = simulate(std::move(pairs), bound);
      break;
    }
    case Premise::Kind::Unify:
      ok = simulate({{p.lhs, p.rhs}}, bound);
      break;
    default:
      ok = false;
  }
  if (ok && after) after->assign(bound.begin(), bound.end());
  return ok;
}

std::vector<Symbol> boundClosure(const std::vector<Premise>& premises, std::vector<Symbol> bound) {
  std::sort(bound.begin(), bound.end());
  std::vector<bool> used(premises.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < premises.size(); ++i) {
      if (used[i] || premises[i].kind == Premise::Kind::Negated) continue;
      std::vector<Symbol> after;
      if (evaluable(premises[i], bound, &after)) {
        used[i] = true;
        bound = std::move(after);
        progress = true;
      }
    }
  }
  return bound;
}

void checkRangeRestriction(const Clause& c) {
  std::vector<Symbol> closure = boundClosure(c.body);
  for (Symbol v : headVars(c))
    if (!std::binary_search(closure.begin(), closure.end(), v)) failUnboundHead(c, v);
}

void checkFunctionBinding(const Clause& c) {
  std::vector<Symbol> inCalls, outside;
  auto scan = [&](TermId t) {
    terms::collectCallVars(t, inCalls);
    terms::collectNonCallVars(t, outside);
  };
  for (TermId t : c.head.args) scan(t);
  for (const Premise& p : c.body) {
    if (p.kind == Premise::Kind::Unify) {
      scan(p.lhs);
      scan(p.rhs);
    } else {
      for (TermId t : p.atom.args) scan(t);
    }
  }
  for (Symbol v : inCalls) {
    if (std::find(outside.begin(), outside.end(), v) == outside.end())
      throw Error(ErrorKind::UnboundFunctionArgument,
                  "variable " + terms::symName(v) + " appears only inside function-call arguments", c.loc);
  }
}

void checkPatterns(const SourceProgram& p) {
  std::function<void(TermId, std::vector<Symbol>&, const syntax::FuncDef&, Location)> walk =
      [&](TermId t, std::vector<Symbol>& seen, const syntax::FuncDef& f, Location loc) {
        const TermNode& n = terms::node(t);
        if (n.kind == TermKind::Var) {
          if (std::find(seen.begin(), seen.end(), n.sym) != seen.end())
            throw Error(ErrorKind::NonLinearPattern,
                        "variable " + terms::symName(n.sym) + " repeated in a pattern of function " +
                            terms::symName(f.name),
                        loc.known() ? loc : f.loc);
          seen.push_back(n.sym);
          return;
        }
        for (TermId a : n.args) walk(a, seen, f, loc);
      };
  std::function<void(const syntax::Expr&, const syntax::FuncDef&)> expr = [&](const syntax::Expr& e,
                                                                             const syntax::FuncDef& f) {
    std::vector<Symbol> seen;
    switch (e.kind) {
      case syntax::Expr::Kind::Term: return;
      case syntax::Expr::Kind::Match:
        expr(*e.scrutinee, f);
        for (const syntax::MatchBranch& b : e.branches) {
          seen.clear();
          walk(b.pattern, seen, f, b.body->loc);
          expr(*b.body, f);
        }
        return;
      case syntax::Expr::Kind::Let:
        walk(e.term, seen, f, e.loc);
        expr(*e.scrutinee, f);
        expr(*e.body, f);
        return;
      case syntax::Expr::Kind::If:
        expr(*e.scrutinee, f);
        expr(*e.body, f);
        expr(*e.elseBranch, f);
        return;
    }
  };
  for (const syntax::FuncDef& f : p.funcDefs) expr(*f.body, f);
}

OrderedRule reorderPremises(const Clause& c) {
  OrderedRule r;
  r.head = c.head;
  r.loc = c.loc;
  std::vector<Symbol> bound;
  std::vector<bool> used(c.body.size(), false);
  for (std::size_t step = 0; step < c.body.size(); ++step) {
    bool placed = false;
    for (std::size_t i = 0; i < c.body.size() && !placed; ++i) {
      if (used[i]) continue;
      std::vector<Symbol> after;
      if (!evaluable(c.body[i], bound, &after)) continue;
      used[i] = true;
      r.body.push_back(c.body[i]);
      r.bindingPlan.push_back(bound);
      r.originalIndex.push_back(i);
      bound = std::move(after);
      placed = true;
    }
    if (!placed) {
      std::string stuck;
      for (std::size_t i = 0; i < c.body.size(); ++i)
        if (!used[i]) stuck += (stuck.empty() ? "" : ", ") + syntax::prettyPrint(c.body[i]);
      throw Error(ErrorKind::NoValidOrder, "no premise order binds the variables needed by: " + stuck, c.loc);
    }
  }
  r.bindingPlan.push_back(bound);
  return r;
}

StratifiedProgram stratify(const SourceProgram& p) {
  // Dependency graph over output relations; edges point from a head to the
  // relations its body mentions.
  std::vector<Symbol> rels;
  std::map<Symbol, std::size_t> index;
  for (const syntax::RelDecl& d : p.relDecls) {
    if (d.kind != syntax::RelKind::Output) continue;
    index[d.name] = rels.size();
    rels.push_back(d.name);
  }
  struct Edge {
    std::size_t to;
    bool negative;
  };
  std::vector<std::vector<Edge>> edges(rels.size());
  for (const Clause& c : p.clauses) {
    if (c.isFact()) continue;
    auto h = index.find(c.head.relation);
    if (h == index.end())
      throw Error(ErrorKind::InputRelationRule,
                  "rule derives input relation " + terms::symName(c.head.relation) + "; input relations only take facts",
                  c.loc);
    for (const Premise& pr : c.body) {
      if (pr.kind == Premise::Kind::Unify) continue;
      auto d = index.find(pr.atom.relation);
      if (d == index.end()) continue;
      edges[h->second].push_back({d->second, pr.kind == Premise::Kind::Negated});
    }
  }

  // Tarjan's algorithm; components come out in reverse topological order,
  // i.e. dependencies first.
  const std::size_t n = rels.size();
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> onStack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0, ncomp = 0;
  std::function<void(std::size_t)> strongConnect = [&](std::size_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    onStack[v] = true;
    for (const Edge& e : edges[v]) {
      if (idx[e.to] < 0) {
        strongConnect(e.to);
        low[v] = std::min(low[v], low[e.to]);
      } else if (onStack[e.to]) {
        low[v] = std::min(low[v], idx[e.to]);
      }
    }
    if (low[v] == idx[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (idx[v] < 0) strongConnect(v);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(ncomp));
  for (std::size_t v = 0; v < n; ++v) members[static_cast<std::size_t>(comp[v])].push_back(v);

  std::vector<int> level(static_cast<std::size_t>(ncomp), 0);
  for (int cI = 0; cI < ncomp; ++cI) {
    for (std::size_t v : members[static_cast<std::size_t>(cI)]) {
      for (const Edge& e : edges[v]) {
        if (comp[e.to] == cI) {
          if (e.negative) {
            std::string cycle;
            for (std::size_t m : members[static_cast<std::size_t>(cI)])
              cycle += (cycle.empty() ? "" : ", ") + terms::symName(rels[m]);
            throw Error(ErrorKind::UnstratifiableNegation,
                        "negation inside a recursive cycle through [" + cycle + "]");
          }
          continue;
        }
        int need = level[static_cast<std::size_t>(comp[e.to])] + (e.negative ? 1 : 0);
        level[static_cast<std::size_t>(cI)] = std::max(level[static_cast<std::size_t>(cI)], need);
      }
    }
  }

  StratifiedProgram out;
  int maxLevel = -1;
  for (int l : level) maxLevel = std::max(maxLevel, l);
  out.strata.resize(static_cast<std::size_t>(maxLevel + 1));
  out.rulesByStratum.resize(out.strata.size());
  for (std::size_t v = 0; v < n; ++v) {
    int l = level[static_cast<std::size_t>(comp[v])];
    out.strata[static_cast<std::size_t>(l)].push_back(rels[v]);
    out.stratumOf[rels[v]] = l;
  }
  for (auto& s : out.strata) std::sort(s.begin(), s.end(), [](Symbol a, Symbol b) {
    return terms::symName(a) < terms::symName(b);
  });
  for (const Clause& c : p.clauses) {
    if (c.isFact()) {
      out.facts.push_back(c);
      continue;
    }
    out.rulesByStratum[static_cast<std::size_t>(out.stratumOf.at(c.head.relation))].push_back(reorderPremises(c));
  }
  return out;
}

StratifiedProgram validateProgram(const SourceProgram& p) {
  checkPatterns(p);
  for (const Clause& c : p.clauses) {
    checkFunctionBinding(c);
    checkRangeRestriction(c);
  }
  return stratify(p);
}

}  // namespace fmlog::validate
