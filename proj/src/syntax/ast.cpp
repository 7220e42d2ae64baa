#include <algorithm>
#include <array>

#include "fmlog/syntax.hpp"

namespace fmlog::syntax {

ExprPtr Expr::makeTerm(TermId t, Location loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Term;
  e->term = t;
  e->loc = loc;
  return e;
}

ExprPtr Expr::makeMatch(ExprPtr scrutinee, std::vector<MatchBranch> branches, Location loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Match;
  e->scrutinee = std::move(scrutinee);
  e->branches = std::move(branches);
  e->loc = loc;
  return e;
}

ExprPtr Expr::makeLet(TermId pattern, ExprPtr bound, ExprPtr body, Location loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Let;
  e->term = pattern;
  e->scrutinee = std::move(bound);
  e->body = std::move(body);
  e->loc = loc;
  return e;
}

ExprPtr Expr::makeIf(ExprPtr cond, ExprPtr then, ExprPtr otherwise, Location loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::If;
  e->scrutinee = std::move(cond);
  e->body = std::move(then);
  e->elseBranch = std::move(otherwise);
  e->loc = loc;
  return e;
}

namespace {
bool equalPtr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}
}  // namespace

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.term != b.term) return false;
  if (!equalPtr(a.scrutinee, b.scrutinee) || !equalPtr(a.body, b.body) || !equalPtr(a.elseBranch, b.elseBranch))
    return false;
  if (a.branches.size() != b.branches.size()) return false;
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    if (a.branches[i].pattern != b.branches[i].pattern) return false;
    if (!equalPtr(a.branches[i].body, b.branches[i].body)) return false;
  }
  return true;
}

std::size_t SourceProgram::factCount() const {
  return static_cast<std::size_t>(std::count_if(clauses.begin(), clauses.end(), [](const Clause& c) { return c.isFact(); }));
}

std::size_t SourceProgram::ruleCount() const { return clauses.size() - factCount(); }

const RelDecl* SourceProgram::findRelation(Symbol name) const {
  for (const RelDecl& r : relDecls)
    if (r.name == name) return &r;
  return nullptr;
}

const FuncDecl* SourceProgram::findFuncDecl(Symbol name) const {
  for (const FuncDecl& f : funcDecls)
    if (f.name == name) return &f;
  return nullptr;
}

const FuncDef* SourceProgram::findFuncDef(Symbol name) const {
  for (const FuncDef& f : funcDefs)
    if (f.name == name) return &f;
  return nullptr;
}

bool equal(const SourceProgram& a, const SourceProgram& b) {
  if (a.typeDefs != b.typeDefs || a.aliases != b.aliases || a.funcDecls != b.funcDecls ||
      a.relDecls != b.relDecls || a.clauses != b.clauses)
    return false;
  if (a.funcDefs.size() != b.funcDefs.size()) return false;
  for (std::size_t i = 0; i < a.funcDefs.size(); ++i) {
    const FuncDef& x = a.funcDefs[i];
    const FuncDef& y = b.funcDefs[i];
    if (x.name != y.name || x.params != y.params || !equalPtr(x.body, y.body)) return false;
  }
  return true;
}

const CtorInfo* findCtor(const SourceProgram& p, Symbol name) {
  thread_local CtorInfo info;
  for (const SourceProgram* prog : {&prelude(), &p}) {
    for (const AdtDef& adt : prog->typeDefs) {
      for (const CtorDef& c : adt.ctors) {
        if (c.name != name) continue;
        info.adt = adt.name;
        info.typeParams = adt.typeParams;
        info.argTypes = c.argTypes;
        return &info;
      }
    }
  }
  return nullptr;
}

namespace {

struct BuiltinEntry {
  Builtin id;
  std::string_view name;
  std::size_t arity;
};

constexpr std::array<BuiltinEntry, 17> kBuiltins = {{
    {Builtin::Add, "+", 2},
    {Builtin::Sub, "-", 2},
    {Builtin::Mul, "*", 2},
    {Builtin::Div, "/", 2},
    {Builtin::Rem, "%", 2},
    {Builtin::Lt, "<", 2},
    {Builtin::Le, "<=", 2},
    {Builtin::Gt, ">", 2},
    {Builtin::Ge, ">=", 2},
    {Builtin::Eq, "==", 2},
    {Builtin::Ne, "!=", 2},
    {Builtin::IsSat, "is_sat", 1},
    {Builtin::Get, "get", 2},
    {Builtin::Put, "put", 3},
    {Builtin::Interpolant, "interpolant", 2},
    {Builtin::StringConcat, "string_concat", 2},
    {Builtin::I32ToString, "i32_to_string", 1},
}};

}  // namespace

std::optional<Builtin> findBuiltin(std::string_view name) {
  for (const BuiltinEntry& e : kBuiltins)
    if (e.name == name) return e.id;
  return std::nullopt;
}

std::string_view builtinName(Builtin b) { return kBuiltins[static_cast<std::size_t>(b)].name; }
std::size_t builtinArity(Builtin b) { return kBuiltins[static_cast<std::size_t>(b)].arity; }

Symbol trueSym() {
  static const Symbol s = terms::sym("true");
  return s;
}
Symbol falseSym() {
  static const Symbol s = terms::sym("false");
  return s;
}
TermId trueTerm() {
  static const TermId t = terms::store().ctor(trueSym());
  return t;
}
TermId falseTerm() {
  static const TermId t = terms::store().ctor(falseSym());
  return t;
}

ExprPtr desugar(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Term: return e;
    case Expr::Kind::Match: {
      std::vector<MatchBranch> branches;
      branches.reserve(e->branches.size());
      for (const MatchBranch& b : e->branches) branches.push_back({b.pattern, desugar(b.body)});
      return Expr::makeMatch(desugar(e->scrutinee), std::move(branches), e->loc);
    }
    case Expr::Kind::Let:
      return Expr::makeMatch(desugar(e->scrutinee), {{e->term, desugar(e->body)}}, e->loc);
    case Expr::Kind::If:
      return Expr::makeMatch(desugar(e->scrutinee),
                             {{trueTerm(), desugar(e->body)}, {falseTerm(), desugar(e->elseBranch)}}, e->loc);
  }
  return e;
}

namespace {

void addUnique(std::vector<Symbol>& out, Symbol s) {
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

void freeVarsInto(const Expr& e, std::vector<Symbol>& out) {
  auto bodyMinus = [&](TermId pattern, const Expr& body) {
    std::vector<Symbol> bound, inner;
    terms::collectVars(pattern, bound);
    freeVarsInto(body, inner);
    for (Symbol s : inner)
      if (std::find(bound.begin(), bound.end(), s) == bound.end()) addUnique(out, s);
  };
  switch (e.kind) {
    case Expr::Kind::Term: {
      std::vector<Symbol> vs;
      terms::collectVars(e.term, vs);
      for (Symbol s : vs) addUnique(out, s);
      return;
    }
    case Expr::Kind::Match:
      freeVarsInto(*e.scrutinee, out);
      for (const MatchBranch& b : e.branches) bodyMinus(b.pattern, *b.body);
      return;
    case Expr::Kind::Let:
      freeVarsInto(*e.scrutinee, out);
      bodyMinus(e.term, *e.body);
      return;
    case Expr::Kind::If:
      freeVarsInto(*e.scrutinee, out);
      freeVarsInto(*e.body, out);
      freeVarsInto(*e.elseBranch, out);
      return;
  }
}

}  // namespace

std::vector<Symbol> freeVars(const Expr& e) {
  std::vector<Symbol> out;
  freeVarsInto(e, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fmlog::syntax
