#include <functional>
#include <unordered_map>

#include "fmlog/types.hpp"

namespace fmlog::types {

using syntax::Builtin;
using syntax::Expr;
using syntax::SourceProgram;

namespace {

bool occurs(const std::string& v, const TypeExpr& t) {
  if (t.kind == TypeExpr::Kind::Var) return t.name == v;
  for (const TypeExpr& a : t.args)
    if (occurs(v, a)) return true;
  return false;
}

TypeExpr substitute(const TypeExpr& t, const std::string& v, const TypeExpr& by) {
  if (t.kind == TypeExpr::Kind::Var) return t.name == v ? by : t;
  if (t.args.empty()) return t;
  TypeExpr out = t;
  for (TypeExpr& a : out.args) a = substitute(a, v, by);
  return out;
}

TypeExpr rigid(std::string name) { return {TypeExpr::Kind::Rigid, std::move(name), {}}; }

[[noreturn]] void mismatch(const TypeExpr& a, const TypeExpr& b) {
  throw Error(ErrorKind::TypeMismatch, "cannot unify " + syntax::render(a) + " with " + syntax::render(b));
}

}  // namespace

TypeExpr TypeEnv::resolve(const TypeExpr& t) const {
  if (t.kind == TypeExpr::Kind::Var) {
    auto it = substitution.find(t.name);
    return it == substitution.end() ? t : it->second;
  }
  if (t.args.empty()) return t;
  TypeExpr out = t;
  for (TypeExpr& a : out.args) a = resolve(a);
  return out;
}

void unifyInto(const TypeExpr& a0, const TypeExpr& b0, TypeEnv& env) {
  TypeExpr a = env.resolve(a0);
  TypeExpr b = env.resolve(b0);
  if (a == b) return;
  if (b.kind == TypeExpr::Kind::Var && a.kind != TypeExpr::Kind::Var) std::swap(a, b);
  if (a.kind == TypeExpr::Kind::Var) {
    if (occurs(a.name, b))
      throw Error(ErrorKind::OccursCheckFailure,
                  "type variable " + a.name + " occurs in " + syntax::render(b));
    for (auto& [name, value] : env.substitution) value = substitute(value, a.name, b);
    env.substitution[a.name] = b;
    return;
  }
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) mismatch(a, b);
  if (a.kind == TypeExpr::Kind::Base || a.kind == TypeExpr::Kind::Rigid) mismatch(a, b);
  for (std::size_t i = 0; i < a.args.size(); ++i) unifyInto(a.args[i], b.args[i], env);
}

TypeEnv unifyTypes(const TypeExpr& a, const TypeExpr& b, TypeEnv env) {
  unifyInto(a, b, env);
  return env;
}

std::pair<std::vector<TypeExpr>, TypeExpr> builtinSignature(Builtin b) {
  const TypeExpr i32 = TypeExpr::base("i32");
  const TypeExpr boolT = TypeExpr::base("bool");
  const TypeExpr str = TypeExpr::base("string");
  const TypeExpr bexp = TypeExpr::named("bool_exp");
  const TypeExpr k = TypeExpr::var("'K");
  const TypeExpr v = TypeExpr::var("'V");
  const TypeExpr map = TypeExpr::named("map", {k, v});
  switch (b) {
    case Builtin::Add:
    case Builtin::Sub:
    case Builtin::Mul:
    case Builtin::Div:
    case Builtin::Rem: return {{i32, i32}, i32};
    case Builtin::Lt:
    case Builtin::Le:
    case Builtin::Gt:
    case Builtin::Ge: return {{i32, i32}, boolT};
    case Builtin::Eq:
    case Builtin::Ne: return {{TypeExpr::var("'A"), TypeExpr::var("'A")}, boolT};
    case Builtin::IsSat: return {{bexp}, boolT};
    case Builtin::Get: return {{k, map}, TypeExpr::named("option", {v})};
    case Builtin::Put: return {{k, v, map}, map};
    case Builtin::Interpolant: return {{bexp, bexp}, TypeExpr::named("option", {bexp})};
    case Builtin::StringConcat: return {{str, str}, str};
    case Builtin::I32ToString: return {{i32}, str};
  }
  return {{}, i32};
}

namespace {

struct CtorSig {
  std::string adt;
  std::vector<std::string> params;
  std::vector<TypeExpr> args;
};

struct FuncSig {
  std::vector<TypeExpr> params;
  TypeExpr ret;
};

class Checker {
 public:
  explicit Checker(const SourceProgram& p) : prog_(p) {
    for (const SourceProgram* src : {&syntax::prelude(), &p})
      for (const syntax::AdtDef& adt : src->typeDefs)
        for (const syntax::CtorDef& c : adt.ctors) ctors_[c.name] = {adt.name, adt.typeParams, c.argTypes};
    for (const syntax::FuncDecl& f : p.funcDecls) funcs_[f.name] = {f.params, f.ret};
  }

  void run() {
    for (const syntax::RelDecl& r : prog_.relDecls) {
      for (const TypeExpr& t : r.argTypes) {
        if (hasTypeVar(t))
          throw Error(ErrorKind::TypeError,
                      "relation '" + terms::symName(r.name) + "' has a polymorphic argument type " + syntax::render(t),
                      r.loc);
      }
    }
    for (const syntax::FuncDef& f : prog_.funcDefs) checkFunction(f);
    for (const syntax::Clause& c : prog_.clauses) checkClause(c);
  }

  void checkFact(const syntax::Atom& a, Location loc) {
    env_ = TypeEnv{};
    checkAtom(a, loc);
    settleOverloads();
  }

 private:
  static bool hasTypeVar(const TypeExpr& t) {
    if (t.kind == TypeExpr::Kind::Var) return true;
    for (const TypeExpr& a : t.args)
      if (hasTypeVar(a)) return true;
    return false;
  }

  TypeExpr fresh() { return TypeExpr::var("'_t" + std::to_string(counter_++)); }

  // Replaces each signature variable by a fresh one, consistently.
  TypeExpr instantiate(const TypeExpr& t, std::map<std::string, TypeExpr>& renaming) {
    if (t.kind == TypeExpr::Kind::Var) {
      auto it = renaming.find(t.name);
      if (it != renaming.end()) return it->second;
      TypeExpr f = fresh();
      renaming.emplace(t.name, f);
      return f;
    }
    if (t.args.empty()) return t;
    TypeExpr out = t;
    for (TypeExpr& a : out.args) a = instantiate(a, renaming);
    return out;
  }

  static TypeExpr rigidify(const TypeExpr& t) {
    if (t.kind == TypeExpr::Kind::Var) return rigid(t.name);
    if (t.args.empty()) return t;
    TypeExpr out = t;
    for (TypeExpr& a : out.args) a = rigidify(a);
    return out;
  }

  void expect(const TypeExpr& expected, const TypeExpr& actual, const std::string& what, Location loc) {
    try {
      unifyInto(expected, actual, env_);
    } catch (const Error& e) {
      TypeExpr x = env_.resolve(expected);
      TypeExpr y = env_.resolve(actual);
      std::string detail = e.kind() == ErrorKind::OccursCheckFailure ? " (infinite type)" : "";
      throw Error(ErrorKind::TypeError,
                  what + ": expected " + syntax::render(x) + " but found " + syntax::render(y) + detail, loc);
    }
  }

  TypeExpr varType(Symbol v) {
    auto it = env_.bindings.find(v);
    if (it != env_.bindings.end()) return it->second;
    TypeExpr t = fresh();
    env_.bindings.emplace(v, t);
    return t;
  }

  TypeExpr infer(TermId t, Location loc) {
    const TermNode& n = terms::node(t);
    switch (n.kind) {
      case TermKind::Var: return varType(n.sym);
      case TermKind::Int: return TypeExpr::base("i32");
      case TermKind::Str: return TypeExpr::base("string");
      case TermKind::Tuple: {
        std::vector<TypeExpr> elems;
        for (TermId a : n.args) elems.push_back(infer(a, loc));
        return TypeExpr::tuple(std::move(elems));
      }
      case TermKind::Ctor: {
        if (n.sym == syntax::trueSym() || n.sym == syntax::falseSym()) {
          // Shared by bool and bool_exp; settled once the clause is done.
          TypeExpr t = fresh();
          overloaded_.push_back({t, loc});
          return t;
        }
        auto it = ctors_.find(n.sym);
        if (it == ctors_.end())
          throw Error(ErrorKind::TypeError, "unknown constructor " + terms::symName(n.sym), loc);
        std::map<std::string, TypeExpr> renaming;
        std::vector<TypeExpr> targs;
        for (const std::string& p : it->second.params) targs.push_back(instantiate(TypeExpr::var(p), renaming));
        for (std::size_t i = 0; i < n.args.size(); ++i) {
          TypeExpr want = instantiate(it->second.args[i], renaming);
          TypeExpr got = infer(n.args[i], loc);
          expect(want, got, "argument " + std::to_string(i + 1) + " of " + terms::symName(n.sym), loc);
        }
        return TypeExpr::named(it->second.adt, std::move(targs));
      }
      case TermKind::Call: {
        FuncSig sig;
        if (auto b = syntax::findBuiltin(terms::symName(n.sym))) {
          auto [params, ret] = builtinSignature(*b);
          sig = {std::move(params), std::move(ret)};
        } else {
          auto it = funcs_.find(n.sym);
          if (it == funcs_.end())
            throw Error(ErrorKind::TypeError, "unknown function " + terms::symName(n.sym), loc);
          sig = it->second;
        }
        std::map<std::string, TypeExpr> renaming;
        for (std::size_t i = 0; i < n.args.size(); ++i) {
          TypeExpr want = instantiate(sig.params[i], renaming);
          TypeExpr got = infer(n.args[i], loc);
          expect(want, got, "argument " + std::to_string(i + 1) + " of " + terms::symName(n.sym), loc);
        }
        return instantiate(sig.ret, renaming);
      }
    }
    return fresh();
  }

  void settleOverloads() {
    const TypeExpr boolT = TypeExpr::base("bool");
    const TypeExpr bexp = TypeExpr::named("bool_exp");
    for (const auto& [t, loc] : overloaded_) {
      TypeExpr r = env_.resolve(t);
      if (r.kind == TypeExpr::Kind::Var) {
        unifyInto(r, boolT, env_);
      } else if (!(r == boolT || r == bexp)) {
        throw Error(ErrorKind::TypeError, "true/false: expected bool or bool_exp but found " + syntax::render(r), loc);
      }
    }
    overloaded_.clear();
  }

  void checkAtom(const syntax::Atom& a, Location loc) {
    const syntax::RelDecl* decl = prog_.findRelation(a.relation);
    if (!decl) throw Error(ErrorKind::TypeError, "unknown relation " + terms::symName(a.relation), loc);
    for (std::size_t i = 0; i < a.args.size(); ++i)
      expect(decl->argTypes[i], infer(a.args[i], loc),
             "argument " + std::to_string(i + 1) + " of relation " + terms::symName(a.relation), loc);
  }

  void checkClause(const syntax::Clause& c) {
    env_ = TypeEnv{};
    checkAtom(c.head, c.loc);
    for (const syntax::Premise& p : c.body) {
      Location loc = p.loc.known() ? p.loc : c.loc;
      if (p.kind == syntax::Premise::Kind::Unify) {
        TypeExpr l = infer(p.lhs, loc);
        TypeExpr r = infer(p.rhs, loc);
        expect(l, r, "unification", loc);
      } else {
        checkAtom(p.atom, loc);
      }
    }
    settleOverloads();
  }

  TypeExpr inferExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Term: return infer(e.term, e.loc);
      case Expr::Kind::Match: {
        TypeExpr scrut = inferExpr(*e.scrutinee);
        TypeExpr result = fresh();
        for (const syntax::MatchBranch& b : e.branches) {
          TypeExpr body = withPattern(b.pattern, scrut, e.loc, [&] { return inferExpr(*b.body); });
          expect(result, body, "match branch", b.body->loc.known() ? b.body->loc : e.loc);
        }
        return result;
      }
      case Expr::Kind::Let: {
        TypeExpr bound = inferExpr(*e.scrutinee);
        return withPattern(e.term, bound, e.loc, [&] { return inferExpr(*e.body); });
      }
      case Expr::Kind::If: {
        expect(TypeExpr::base("bool"), inferExpr(*e.scrutinee), "if condition", e.loc);
        TypeExpr t = inferExpr(*e.body);
        expect(t, inferExpr(*e.elseBranch), "else branch", e.loc);
        return t;
      }
    }
    return fresh();
  }

  // Pattern variables shadow outer bindings for the extent of `body`.
  TypeExpr withPattern(TermId pattern, const TypeExpr& against, Location loc, const std::function<TypeExpr()>& body) {
    std::vector<Symbol> vars;
    terms::collectVars(pattern, vars);
    std::vector<std::pair<Symbol, std::optional<TypeExpr>>> saved;
    for (Symbol v : vars) {
      auto it = env_.bindings.find(v);
      saved.emplace_back(v, it == env_.bindings.end() ? std::nullopt : std::optional<TypeExpr>(it->second));
      env_.bindings[v] = fresh();
    }
    expect(against, infer(pattern, loc), "pattern", loc);
    TypeExpr result = body();
    for (auto& [v, old] : saved) {
      if (old) {
        env_.bindings[v] = *old;
      } else {
        env_.bindings.erase(v);
      }
    }
    return result;
  }

  void checkFunction(const syntax::FuncDef& f) {
    env_ = TypeEnv{};
    const syntax::FuncDecl* decl = prog_.findFuncDecl(f.name);
    for (std::size_t i = 0; i < f.params.size(); ++i) env_.bindings[f.params[i]] = rigidify(decl->params[i]);
    TypeExpr body = inferExpr(*f.body);
    expect(rigidify(decl->ret), body, "result of function " + terms::symName(f.name), f.loc);
    settleOverloads();
  }

  const SourceProgram& prog_;
  std::unordered_map<Symbol, CtorSig> ctors_;
  std::unordered_map<Symbol, FuncSig> funcs_;
  TypeEnv env_;
  std::vector<std::pair<TypeExpr, Location>> overloaded_;
  int counter_ = 0;
};

}  // namespace

void checkProgram(const SourceProgram& p) { Checker(p).run(); }

struct FactChecker::Impl : Checker {
  using Checker::Checker;
};

FactChecker::FactChecker(const SourceProgram& p) : impl_(std::make_unique<Impl>(p)) {}
FactChecker::~FactChecker() = default;
void FactChecker::check(const syntax::Atom& a, Location loc) { impl_->checkFact(a, loc); }

}  // namespace fmlog::types
