#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "fmlog/syntax.hpp"
#include "lexer.hpp"

namespace fmlog::syntax {

namespace {

// ---------------------------------------------------------------------------
// Raw (unresolved) syntax

struct RawTerm {
  enum class Kind { Var, Int, Str, Ident, Tuple, Op };

  Kind kind = Kind::Int;
  std::string name;
  std::int32_t value = 0;
  bool parens = false;  // Ident written with an argument list
  std::vector<RawTerm> args;
  Location loc;
};

struct RawExpr;
using RawExprPtr = std::shared_ptr<RawExpr>;

struct RawExpr {
  Expr::Kind kind = Expr::Kind::Term;
  RawTerm term;  // Term / Let pattern
  RawExprPtr scrutinee;
  std::vector<std::pair<RawTerm, RawExprPtr>> branches;
  RawExprPtr body;
  RawExprPtr elseBranch;
  Location loc;
};

struct RawPremise {
  bool negated = false;
  RawTerm lhs;
  std::optional<RawTerm> rhs;
  Location loc;
};

struct RawClause {
  RawTerm head;
  std::vector<RawPremise> body;
  Location loc;
};

struct RawAdt {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::pair<std::string, std::vector<TypeExpr>>> ctors;
  std::vector<Location> ctorLocs;
  Location loc;
};

struct RawAlias {
  std::string name;
  std::vector<std::string> params;
  TypeExpr target;
  Location loc;
};

struct RawFuncDecl {
  std::string name;
  std::vector<TypeExpr> params;
  TypeExpr ret;
  Location loc;
};

struct RawFuncDef {
  std::string name;
  std::vector<std::string> params;
  RawExprPtr body;
  Location loc;
};

struct RawRelDecl {
  std::string name;
  std::vector<TypeExpr> args;
  RelKind kind;
  Location loc;
};

struct RawProgram {
  std::vector<RawAdt> adts;
  std::vector<RawAlias> aliases;
  std::vector<RawFuncDecl> funcDecls;
  std::vector<RawFuncDef> funcDefs;
  std::vector<RawRelDecl> relDecls;
  std::vector<RawClause> clauses;
};

bool isBaseType(std::string_view n) { return n == "i32" || n == "string" || n == "bool"; }

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::vector<Token> tokens, ErrorKind errorKind, std::set<std::string> typeNames = {})
      : toks_(std::move(tokens)), errorKind_(errorKind), typeNames_(std::move(typeNames)) {}

  RawProgram program() {
    prescanTypeNames();
    RawProgram p;
    while (peek().kind != Token::Kind::End) {
      if (peek().keyword("define")) {
        defineType(p);
      } else if (peek().keyword("declare")) {
        declare(p);
      } else if (peek().keyword("fun")) {
        p.funcDefs.push_back(funcDef());
      } else {
        p.clauses.push_back(clause());
      }
    }
    return p;
  }

  RawTerm standaloneTerm() {
    RawTerm t = term();
    if (peek().kind != Token::Kind::End) fail("unexpected '" + peek().text + "' after term");
    return t;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw Error(errorKind_, msg, peek().loc); }

  std::string describe(const Token& t) const {
    if (t.kind == Token::Kind::End) return "end of input";
    if (t.kind == Token::Kind::Str) return "string literal";
    return "'" + t.text + "'";
  }

  void expect(std::string_view punct) {
    if (!peek().punct(punct)) fail("expected '" + std::string(punct) + "' but found " + describe(peek()));
    next();
  }
  void expectKeyword(std::string_view kw) {
    if (!peek().keyword(kw)) fail("expected '" + std::string(kw) + "' but found " + describe(peek()));
    next();
  }
  std::string expectIdent(const char* what) {
    if (peek().kind != Token::Kind::Ident || isKeyword(peek().text))
      fail(std::string("expected ") + what + " but found " + describe(peek()));
    return next().text;
  }

  void prescanTypeNames() {
    for (std::size_t i = 0; i + 2 < toks_.size(); ++i) {
      if (!toks_[i].keyword("define") || !toks_[i + 1].keyword("type")) continue;
      std::size_t j = i + 2;
      if (toks_[j].kind == Token::Kind::TyVar) {
        ++j;
      } else if (toks_[j].punct("(")) {
        while (j < toks_.size() && !toks_[j].punct(")")) ++j;
        ++j;
      }
      if (j < toks_.size() && toks_[j].kind == Token::Kind::Ident) typeNames_.insert(toks_[j].text);
    }
  }

  // --- types -------------------------------------------------------------

  TypeExpr type() {
    std::vector<TypeExpr> parts{appType()};
    while (peek().punct("*")) {
      next();
      parts.push_back(appType());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return TypeExpr::tuple(std::move(parts));
  }

  TypeExpr appType() {
    TypeExpr t;
    if (peek().kind == Token::Kind::TyVar) {
      t = TypeExpr::var(next().text);
    } else if (peek().punct("(")) {
      next();
      std::vector<TypeExpr> inner{type()};
      while (peek().punct(",")) {
        next();
        inner.push_back(type());
      }
      expect(")");
      if (inner.size() == 1) {
        t = std::move(inner.front());
      } else {
        std::string name = expectIdent("type constructor after type argument list");
        t = TypeExpr::named(std::move(name), std::move(inner));
      }
    } else {
      t = TypeExpr::named(expectIdent("type"));
    }
    while (peek().kind == Token::Kind::Ident && !isKeyword(peek().text)) {
      std::string name = next().text;
      t = TypeExpr::named(std::move(name), {std::move(t)});
    }
    return t;
  }

  std::vector<TypeExpr> typeList() {
    expect("(");
    std::vector<TypeExpr> out;
    if (!peek().punct(")")) {
      out.push_back(type());
      while (peek().punct(",")) {
        next();
        out.push_back(type());
      }
    }
    expect(")");
    return out;
  }

  // --- declarations ------------------------------------------------------

  void defineType(RawProgram& p) {
    Location loc = peek().loc;
    expectKeyword("define");
    expectKeyword("type");
    std::vector<std::string> params;
    if (peek().kind == Token::Kind::TyVar) {
      params.push_back(next().text);
    } else if (peek().punct("(")) {
      next();
      while (true) {
        if (peek().kind != Token::Kind::TyVar) fail("expected type variable in type parameter list");
        params.push_back(next().text);
        if (peek().punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect(")");
    }
    std::string name = expectIdent("type name");
    expect("=");

    bool isAdt;
    if (peek().punct("|")) {
      isAdt = true;
    } else if (peek().kind == Token::Kind::Ident) {
      isAdt = peek(1).punct("(") || peek(1).punct("|") ||
              !(isBaseType(peek().text) || typeNames_.count(peek().text) > 0);
    } else {
      isAdt = false;
    }

    if (!isAdt) {
      RawAlias alias{name, params, type(), loc};
      expect(".");
      p.aliases.push_back(std::move(alias));
      return;
    }

    RawAdt adt{name, params, {}, {}, loc};
    if (peek().punct("|")) next();
    while (true) {
      Location cloc = peek().loc;
      std::string ctor = expectIdent("constructor name");
      std::vector<TypeExpr> args;
      if (peek().punct("(")) args = typeList();
      adt.ctors.push_back({std::move(ctor), std::move(args)});
      adt.ctorLocs.push_back(cloc);
      if (peek().punct("|")) {
        next();
        continue;
      }
      break;
    }
    expect(".");
    p.adts.push_back(std::move(adt));
  }

  void declare(RawProgram& p) {
    Location loc = peek().loc;
    expectKeyword("declare");
    if (peek().keyword("fun")) {
      next();
      RawFuncDecl d;
      d.loc = loc;
      d.name = expectIdent("function name");
      d.params = typeList();
      expect(":");
      d.ret = type();
      expect(".");
      p.funcDecls.push_back(std::move(d));
      return;
    }
    RelKind kind;
    if (peek().keyword("input")) {
      kind = RelKind::Input;
    } else if (peek().keyword("output")) {
      kind = RelKind::Output;
    } else {
      fail("expected 'fun', 'input' or 'output' after 'declare'");
    }
    next();
    RawRelDecl d;
    d.loc = loc;
    d.kind = kind;
    d.name = expectIdent("relation name");
    d.args = typeList();
    expect(".");
    p.relDecls.push_back(std::move(d));
  }

  RawFuncDef funcDef() {
    RawFuncDef d;
    d.loc = peek().loc;
    expectKeyword("fun");
    d.name = expectIdent("function name");
    expect("(");
    if (!peek().punct(")")) {
      while (true) {
        if (peek().kind != Token::Kind::Var) fail("function parameters must be variables");
        d.params.push_back(next().text);
        if (peek().punct(",")) {
          next();
          continue;
        }
        break;
      }
    }
    expect(")");
    expect("=");
    d.body = expr();
    expect(".");
    return d;
  }

  // --- clauses -----------------------------------------------------------

  RawClause clause() {
    RawClause c;
    c.loc = peek().loc;
    c.head = term();
    if (peek().punct(":-")) {
      next();
      c.body.push_back(premise());
      while (peek().punct(",")) {
        next();
        c.body.push_back(premise());
      }
    }
    expect(".");
    return c;
  }

  RawPremise premise() {
    RawPremise p;
    p.loc = peek().loc;
    if (peek().punct("!")) {
      next();
      p.negated = true;
      p.lhs = term();
      return p;
    }
    p.lhs = term();
    if (peek().punct("=")) {
      next();
      p.rhs = term();
    }
    return p;
  }

  // --- expressions -------------------------------------------------------

  RawExprPtr expr() {
    auto e = std::make_shared<RawExpr>();
    e->loc = peek().loc;
    if (peek().keyword("match")) {
      next();
      e->kind = Expr::Kind::Match;
      e->scrutinee = expr();
      expectKeyword("with");
      if (peek().punct("|")) next();
      while (true) {
        RawTerm pat = term();
        expect("=>");
        RawExprPtr body = expr();
        e->branches.emplace_back(std::move(pat), std::move(body));
        if (peek().punct("|")) {
          next();
          continue;
        }
        break;
      }
      expectKeyword("end");
    } else if (peek().keyword("let")) {
      next();
      e->kind = Expr::Kind::Let;
      e->term = term();
      expect("=");
      e->scrutinee = expr();
      expectKeyword("in");
      e->body = expr();
    } else if (peek().keyword("if")) {
      next();
      e->kind = Expr::Kind::If;
      e->scrutinee = expr();
      expectKeyword("then");
      e->body = expr();
      expectKeyword("else");
      e->elseBranch = expr();
    } else {
      e->kind = Expr::Kind::Term;
      e->term = term();
    }
    return e;
  }

  // --- terms -------------------------------------------------------------

  static RawTerm op(std::string name, RawTerm a, RawTerm b, Location loc) {
    RawTerm t;
    t.kind = RawTerm::Kind::Op;
    t.name = std::move(name);
    t.loc = loc;
    t.args.push_back(std::move(a));
    t.args.push_back(std::move(b));
    return t;
  }

  RawTerm term() {
    RawTerm lhs = additive();
    static const char* cmps[] = {"==", "!=", "<", "<=", ">", ">="};
    for (const char* c : cmps) {
      if (peek().punct(c)) {
        Location loc = peek().loc;
        next();
        RawTerm rhs = additive();
        return op(c, std::move(lhs), std::move(rhs), loc);
      }
    }
    return lhs;
  }

  RawTerm additive() {
    RawTerm t = multiplicative();
    while (peek().punct("+") || peek().punct("-")) {
      Location loc = peek().loc;
      std::string o = next().text;
      t = op(o, std::move(t), multiplicative(), loc);
    }
    return t;
  }

  RawTerm multiplicative() {
    RawTerm t = unary();
    while (peek().punct("*") || peek().punct("/") || peek().punct("%")) {
      Location loc = peek().loc;
      std::string o = next().text;
      t = op(o, std::move(t), unary(), loc);
    }
    return t;
  }

  RawTerm unary() {
    if (peek().punct("-")) {
      Location loc = peek().loc;
      next();
      if (peek().kind == Token::Kind::Int) {
        const Token& lit = next();
        RawTerm t;
        t.kind = RawTerm::Kind::Int;
        t.loc = loc;
        t.value = static_cast<std::int32_t>(-static_cast<std::int64_t>(lit.magnitude));
        return t;
      }
      RawTerm zero;
      zero.kind = RawTerm::Kind::Int;
      zero.loc = loc;
      return op("-", std::move(zero), unary(), loc);
    }
    return primary();
  }

  RawTerm primary() {
    RawTerm t;
    t.loc = peek().loc;
    const Token& tok = peek();
    switch (tok.kind) {
      case Token::Kind::Var:
        t.kind = RawTerm::Kind::Var;
        t.name = next().text;
        return t;
      case Token::Kind::Int:
        if (tok.magnitude > 2147483647ULL) fail("integer literal out of 32-bit range");
        t.kind = RawTerm::Kind::Int;
        t.value = static_cast<std::int32_t>(next().magnitude);
        return t;
      case Token::Kind::Str:
        t.kind = RawTerm::Kind::Str;
        t.name = next().text;
        return t;
      case Token::Kind::Ident:
        if (isKeyword(tok.text)) fail("unexpected keyword '" + tok.text + "'");
        t.kind = RawTerm::Kind::Ident;
        t.name = next().text;
        if (peek().punct("(")) {
          next();
          t.parens = true;
          if (!peek().punct(")")) {
            t.args.push_back(term());
            while (peek().punct(",")) {
              next();
              t.args.push_back(term());
            }
          }
          expect(")");
        }
        return t;
      case Token::Kind::Punct:
        if (tok.text == "(") {
          next();
          std::vector<RawTerm> elems{term()};
          while (peek().punct(",")) {
            next();
            elems.push_back(term());
          }
          expect(")");
          if (elems.size() == 1) return std::move(elems.front());
          t.kind = RawTerm::Kind::Tuple;
          t.args = std::move(elems);
          return t;
        }
        break;
      default:
        break;
    }
    fail("expected a term but found " + describe(tok));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ErrorKind errorKind_;
  std::set<std::string> typeNames_;
};

// ---------------------------------------------------------------------------
// Resolver

class Resolver {
 public:
  explicit Resolver(const SourceProgram* base) : base_(base) {}

  SourceProgram resolve(const RawProgram& raw) {
    SourceProgram out;
    collectTypes(raw);
    for (const RawAlias& a : raw.aliases) {
      TypeAlias alias{a.name, a.params, resolveType(a.target, a.loc, &a.params), a.loc};
      out.aliases.push_back(std::move(alias));
    }
    for (const RawAdt& adt : raw.adts) out.typeDefs.push_back(resolveAdt(adt));

    // functions
    for (const RawFuncDecl& d : raw.funcDecls) {
      if (funcArity_.count(d.name) || findBuiltin(d.name))
        throw Error(ErrorKind::ResolutionError, "function '" + d.name + "' declared twice", d.loc);
      if (ctorArity_.count(d.name))
        throw Error(ErrorKind::ResolutionError, "function '" + d.name + "' clashes with a constructor", d.loc);
      FuncDecl fd;
      fd.name = terms::sym(d.name);
      fd.loc = d.loc;
      for (const TypeExpr& t : d.params) fd.params.push_back(resolveType(t, d.loc, nullptr));
      fd.ret = resolveType(d.ret, d.loc, nullptr);
      funcArity_[d.name] = fd.params.size();
      out.funcDecls.push_back(std::move(fd));
    }

    // relations
    for (const RawRelDecl& d : raw.relDecls) {
      if (relArity_.count(d.name))
        throw Error(ErrorKind::ResolutionError, "relation '" + d.name + "' declared twice", d.loc);
      RelDecl rd;
      rd.name = terms::sym(d.name);
      rd.kind = d.kind;
      rd.loc = d.loc;
      for (const TypeExpr& t : d.args) rd.argTypes.push_back(resolveType(t, d.loc, nullptr));
      relArity_[d.name] = rd.argTypes.size();
      out.relDecls.push_back(std::move(rd));
    }

    std::set<std::string> defined;
    for (const RawFuncDef& d : raw.funcDefs) {
      auto it = funcArity_.find(d.name);
      if (it == funcArity_.end())
        throw Error(ErrorKind::ResolutionError, "function '" + d.name + "' defined without a declaration", d.loc);
      if (it->second != d.params.size())
        throw Error(ErrorKind::ResolutionError,
                    "function '" + d.name + "' defined with " + std::to_string(d.params.size()) +
                        " parameters but declared with " + std::to_string(it->second),
                    d.loc);
      if (!defined.insert(d.name).second)
        throw Error(ErrorKind::ResolutionError, "function '" + d.name + "' defined twice", d.loc);
      out.funcDefs.push_back(resolveFuncDef(d));
    }
    for (const RawFuncDecl& d : raw.funcDecls)
      if (!defined.count(d.name))
        throw Error(ErrorKind::ResolutionError, "function '" + d.name + "' declared but never defined", d.loc);

    for (const RawClause& c : raw.clauses) out.clauses.push_back(resolveClause(c));
    return out;
  }

  TermId groundTerm(const RawTerm& t) {
    groundOnly_ = true;
    return resolveTerm(t);
  }

  void indexBase() {
    if (!base_) return;
    for (const AdtDef& adt : base_->typeDefs) {
      typeArity_[adt.name] = adt.typeParams.size();
      for (const CtorDef& c : adt.ctors) ctorArity_[terms::symName(c.name)] = c.argTypes.size();
    }
  }

  void indexProgram(const SourceProgram& p) {
    for (const AdtDef& adt : p.typeDefs)
      for (const CtorDef& c : adt.ctors) ctorArity_[terms::symName(c.name)] = c.argTypes.size();
    for (const FuncDecl& f : p.funcDecls) funcArity_[terms::symName(f.name)] = f.params.size();
  }

 private:
  void collectTypes(const RawProgram& raw) {
    indexBase();
    auto addName = [&](const std::string& name, std::size_t arity, Location loc) {
      if (isBaseType(name) || typeArity_.count(name) || aliases_.count(name))
        throw Error(ErrorKind::ResolutionError, "type '" + name + "' defined twice", loc);
      typeArity_[name] = arity;
    };
    for (const RawAdt& adt : raw.adts) addName(adt.name, adt.params.size(), adt.loc);
    for (const RawAlias& a : raw.aliases) {
      if (isBaseType(a.name) || typeArity_.count(a.name) || aliases_.count(a.name))
        throw Error(ErrorKind::ResolutionError, "type '" + a.name + "' defined twice", a.loc);
      aliases_[a.name] = &a;
    }
    for (const RawAdt& adt : raw.adts) {
      for (std::size_t i = 0; i < adt.ctors.size(); ++i) {
        const std::string& c = adt.ctors[i].first;
        if (ctorArity_.count(c))
          throw Error(ErrorKind::ResolutionError, "constructor '" + c + "' defined twice", adt.ctorLocs[i]);
        ctorArity_[c] = adt.ctors[i].second.size();
      }
    }
  }

  TypeExpr resolveType(const TypeExpr& t, Location loc, const std::vector<std::string>* allowedVars,
                       int depth = 0) {
    if (depth > 64) throw Error(ErrorKind::ResolutionError, "type alias expansion does not terminate", loc);
    switch (t.kind) {
      case TypeExpr::Kind::Var:
        if (allowedVars && std::find(allowedVars->begin(), allowedVars->end(), t.name) == allowedVars->end())
          throw Error(ErrorKind::ResolutionError, "type variable " + t.name + " is not a parameter", loc);
        return t;
      case TypeExpr::Kind::Tuple: {
        std::vector<TypeExpr> elems;
        for (const TypeExpr& e : t.args) elems.push_back(resolveType(e, loc, allowedVars, depth));
        return TypeExpr::tuple(std::move(elems));
      }
      case TypeExpr::Kind::Base:
      case TypeExpr::Kind::Rigid:
        return t;
      case TypeExpr::Kind::Named:
        break;
    }
    std::vector<TypeExpr> args;
    for (const TypeExpr& a : t.args) args.push_back(resolveType(a, loc, allowedVars, depth));
    if (isBaseType(t.name)) {
      if (!args.empty()) throw Error(ErrorKind::ResolutionError, "base type " + t.name + " takes no arguments", loc);
      return TypeExpr::base(t.name);
    }
    if (auto it = aliases_.find(t.name); it != aliases_.end()) {
      const RawAlias& alias = *it->second;
      if (alias.params.size() != args.size())
        throw Error(ErrorKind::ResolutionError, "type " + t.name + " expects " +
                                                    std::to_string(alias.params.size()) + " arguments",
                    loc);
      TypeExpr body = substituteParams(alias.target, alias.params, args);
      return resolveType(body, loc, allowedVars, depth + 1);
    }
    auto it = typeArity_.find(t.name);
    if (it == typeArity_.end()) throw Error(ErrorKind::ResolutionError, "unknown type '" + t.name + "'", loc);
    if (it->second != args.size())
      throw Error(ErrorKind::ResolutionError,
                  "type " + t.name + " expects " + std::to_string(it->second) + " arguments", loc);
    return TypeExpr::named(t.name, std::move(args));
  }

  static TypeExpr substituteParams(const TypeExpr& t, const std::vector<std::string>& params,
                                   const std::vector<TypeExpr>& args) {
    if (t.kind == TypeExpr::Kind::Var) {
      for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i] == t.name) return args[i];
      return t;
    }
    TypeExpr out = t;
    for (TypeExpr& a : out.args) a = substituteParams(a, params, args);
    return out;
  }

  AdtDef resolveAdt(const RawAdt& raw) {
    AdtDef adt;
    adt.name = raw.name;
    adt.typeParams = raw.params;
    adt.loc = raw.loc;
    for (std::size_t i = 0; i < raw.ctors.size(); ++i) {
      CtorDef c;
      c.name = terms::sym(raw.ctors[i].first);
      for (const TypeExpr& t : raw.ctors[i].second) c.argTypes.push_back(resolveType(t, raw.ctorLocs[i], &raw.params));
      adt.ctors.push_back(std::move(c));
    }
    return adt;
  }

  // --- terms -------------------------------------------------------------

  std::string freshAnon() { return std::string(kAnonPrefix) + std::to_string(anonCounter_++); }

  TermId resolveTerm(const RawTerm& t) {
    TermStore& st = terms::store();
    switch (t.kind) {
      case RawTerm::Kind::Var:
        if (groundOnly_) throw Error(ErrorKind::TermParseError, "variables are not allowed here", t.loc);
        if (t.name == "_") return terms::var(freshAnon());
        return terms::var(t.name);
      case RawTerm::Kind::Int: return st.integer(t.value);
      case RawTerm::Kind::Str: return st.string(t.name);
      case RawTerm::Kind::Tuple: {
        std::vector<TermId> args;
        for (const RawTerm& a : t.args) args.push_back(resolveTerm(a));
        return st.tuple(args);
      }
      case RawTerm::Kind::Op: {
        if (groundOnly_) throw Error(ErrorKind::TermParseError, "function calls are not allowed here", t.loc);
        std::vector<TermId> args;
        for (const RawTerm& a : t.args) args.push_back(resolveTerm(a));
        return st.call(terms::sym(t.name), args);
      }
      case RawTerm::Kind::Ident:
        break;
    }
    std::vector<TermId> args;
    for (const RawTerm& a : t.args) args.push_back(resolveTerm(a));
    if (auto it = ctorArity_.find(t.name); it != ctorArity_.end()) {
      if (it->second != args.size())
        throw Error(errorKind(), "constructor '" + t.name + "' expects " + std::to_string(it->second) +
                                     " arguments but got " + std::to_string(args.size()),
                    t.loc);
      return st.ctor(terms::sym(t.name), args);
    }
    std::optional<std::size_t> arity;
    if (auto it = funcArity_.find(t.name); it != funcArity_.end()) arity = it->second;
    if (auto b = findBuiltin(t.name)) arity = builtinArity(*b);
    if (arity && !groundOnly_) {
      if (*arity != args.size())
        throw Error(ErrorKind::ResolutionError, "function '" + t.name + "' expects " + std::to_string(*arity) +
                                                    " arguments but got " + std::to_string(args.size()),
                    t.loc);
      return st.call(terms::sym(t.name), args);
    }
    if (relArity_.count(t.name))
      throw Error(errorKind(), "relation '" + t.name + "' used as a term", t.loc);
    throw Error(errorKind(), "unknown constructor or function '" + t.name + "'", t.loc);
  }

  ErrorKind errorKind() const { return groundOnly_ ? ErrorKind::TermParseError : ErrorKind::ResolutionError; }

  Atom resolveAtom(const RawTerm& t) {
    auto it = relArity_.find(t.name);
    if (t.kind != RawTerm::Kind::Ident || it == relArity_.end())
      throw Error(ErrorKind::ResolutionError, "expected a relation atom", t.loc);
    if (it->second != t.args.size())
      throw Error(ErrorKind::ResolutionError, "relation '" + t.name + "' expects " + std::to_string(it->second) +
                                                  " arguments but got " + std::to_string(t.args.size()),
                  t.loc);
    Atom a;
    a.relation = terms::sym(t.name);
    for (const RawTerm& arg : t.args) a.args.push_back(resolveTerm(arg));
    return a;
  }

  bool isRelationAtom(const RawTerm& t) const {
    return t.kind == RawTerm::Kind::Ident && relArity_.count(t.name) > 0;
  }

  Clause resolveClause(const RawClause& raw) {
    anonCounter_ = 0;
    Clause c;
    c.loc = raw.loc;
    c.head = resolveAtom(raw.head);
    for (const RawPremise& p : raw.body) {
      if (p.negated) {
        c.body.push_back(Premise::negated(resolveAtom(p.lhs), p.loc));
      } else if (p.rhs) {
        c.body.push_back(Premise::unification(resolveTerm(p.lhs), resolveTerm(*p.rhs), p.loc));
      } else if (isRelationAtom(p.lhs)) {
        c.body.push_back(Premise::positive(resolveAtom(p.lhs), p.loc));
      } else {
        // A bare boolean-valued term holds when it reduces to true.
        c.body.push_back(Premise::unification(resolveTerm(p.lhs), trueTerm(), p.loc));
      }
    }
    return c;
  }

  // --- functions ---------------------------------------------------------

  ExprPtr resolveExpr(const RawExpr& e) {
    switch (e.kind) {
      case Expr::Kind::Term: return Expr::makeTerm(resolveTerm(e.term), e.loc);
      case Expr::Kind::Match: {
        ExprPtr scrut = resolveExpr(*e.scrutinee);
        std::vector<MatchBranch> branches;
        for (const auto& [pat, body] : e.branches) branches.push_back({resolvePattern(pat), resolveExpr(*body)});
        return Expr::makeMatch(std::move(scrut), std::move(branches), e.loc);
      }
      case Expr::Kind::Let: {
        ExprPtr bound = resolveExpr(*e.scrutinee);
        TermId pat = resolvePattern(e.term);
        return Expr::makeLet(pat, std::move(bound), resolveExpr(*e.body), e.loc);
      }
      case Expr::Kind::If:
        return Expr::makeIf(resolveExpr(*e.scrutinee), resolveExpr(*e.body), resolveExpr(*e.elseBranch), e.loc);
    }
    return nullptr;
  }

  TermId resolvePattern(const RawTerm& t) {
    TermId p = resolveTerm(t);
    if (terms::node(p).hasCall)
      throw Error(ErrorKind::ResolutionError, "function calls are not allowed in patterns", t.loc);
    return p;
  }

  FuncDef resolveFuncDef(const RawFuncDef& raw) {
    anonCounter_ = 0;
    FuncDef d;
    d.name = terms::sym(raw.name);
    d.loc = raw.loc;
    for (const std::string& p : raw.params) {
      Symbol s = terms::sym(p);
      if (std::find(d.params.begin(), d.params.end(), s) != d.params.end())
        throw Error(ErrorKind::ResolutionError, "parameter " + p + " repeated", raw.loc);
      d.params.push_back(s);
    }
    d.body = resolveExpr(*raw.body);
    for (Symbol v : freeVars(*d.body)) {
      if (std::find(d.params.begin(), d.params.end(), v) == d.params.end())
        throw Error(ErrorKind::ResolutionError,
                    "variable " + terms::symName(v) + " in function '" + raw.name + "' is not bound", raw.loc);
    }
    return d;
  }

  const SourceProgram* base_;
  std::unordered_map<std::string, std::size_t> typeArity_;
  std::unordered_map<std::string, const RawAlias*> aliases_;
  std::unordered_map<std::string, std::size_t> ctorArity_;
  std::unordered_map<std::string, std::size_t> funcArity_;
  std::unordered_map<std::string, std::size_t> relArity_;
  int anonCounter_ = 0;
  bool groundOnly_ = false;
};

const char* kPreludeSource = R"(
define type bool_exp =
  | true
  | false
  | not(bool_exp)
  | and(bool_exp, bool_exp)
  | or(bool_exp, bool_exp)
  | bv32_eq(bv32_exp, bv32_exp)
  | bv32_slt(bv32_exp, bv32_exp)
  | bv32_sgt(bv32_exp, bv32_exp).

define type bv32_exp =
  | bv32_const(i32)
  | bv32_sym(string)
  | bv32_neg(bv32_exp)
  | bv32_add(bv32_exp, bv32_exp)
  | bv32_sub(bv32_exp, bv32_exp)
  | bv32_div(bv32_exp, bv32_exp)
  | bv32_mul(bv32_exp, bv32_exp)
  | bv32_rem(bv32_exp, bv32_exp).

define type 'A option = none | some('A).

define type ('K, 'V) map = mnil | mcons('K, 'V, ('K, 'V) map).
)";

}  // namespace

const SourceProgram& prelude() {
  static const SourceProgram p = [] {
    Parser parser(tokenize(kPreludeSource), ErrorKind::SyntaxError);
    RawProgram raw = parser.program();
    Resolver r(nullptr);
    return r.resolve(raw);
  }();
  return p;
}

SourceProgram parse(std::string_view source) {
  Parser parser(tokenize(source), ErrorKind::SyntaxError);
  RawProgram raw = parser.program();
  Resolver r(&prelude());
  return r.resolve(raw);
}

TermId parseGroundTerm(std::string_view text, const SourceProgram& program) {
  Parser parser(tokenize(text, ErrorKind::TermParseError), ErrorKind::TermParseError);
  RawTerm raw = parser.standaloneTerm();
  Resolver r(&prelude());
  r.indexBase();
  r.indexProgram(program);
  return r.groundTerm(raw);
}

}  // namespace fmlog::syntax
