#pragma once

// Surface syntax: abstract syntax, parser with identifier resolution,
// pretty printer and desugaring.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmlog/error.hpp"
#include "fmlog/terms.hpp"

namespace fmlog::syntax {

struct TypeExpr {
  // Rigid is an opaque stand-in for a signature type variable while a
  // polymorphic function body is checked.
  enum class Kind { Base, Var, Tuple, Named, Rigid };

  Kind kind = Kind::Base;
  std::string name;
  std::vector<TypeExpr> args;

  static TypeExpr base(std::string name) { return {Kind::Base, std::move(name), {}}; }
  static TypeExpr var(std::string name) { return {Kind::Var, std::move(name), {}}; }
  static TypeExpr tuple(std::vector<TypeExpr> elems) { return {Kind::Tuple, {}, std::move(elems)}; }
  static TypeExpr named(std::string name, std::vector<TypeExpr> args = {}) {
    return {Kind::Named, std::move(name), std::move(args)};
  }

  friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

std::string render(const TypeExpr& t);

// Source locations are never part of equality.

struct CtorDef {
  Symbol name = 0;
  std::vector<TypeExpr> argTypes;
  friend bool operator==(const CtorDef&, const CtorDef&) = default;
};

struct AdtDef {
  std::string name;
  std::vector<std::string> typeParams;
  std::vector<CtorDef> ctors;
  Location loc;
  friend bool operator==(const AdtDef& a, const AdtDef& b) {
    return a.name == b.name && a.typeParams == b.typeParams && a.ctors == b.ctors;
  }
};

struct TypeAlias {
  std::string name;
  std::vector<std::string> typeParams;
  TypeExpr target;
  Location loc;
  friend bool operator==(const TypeAlias& a, const TypeAlias& b) {
    return a.name == b.name && a.typeParams == b.typeParams && a.target == b.target;
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct MatchBranch {
  TermId pattern = kNoTerm;
  ExprPtr body;
};

struct Expr {
  enum class Kind { Term, Match, Let, If };

  Kind kind = Kind::Term;
  // Term: the term. Let: the pattern.
  TermId term = kNoTerm;
  // Match: scrutinee. Let: bound expression. If: condition.
  ExprPtr scrutinee;
  std::vector<MatchBranch> branches;
  // Let: body. If: then-branch.
  ExprPtr body;
  ExprPtr elseBranch;
  Location loc;

  static ExprPtr makeTerm(TermId t, Location loc = {});
  static ExprPtr makeMatch(ExprPtr scrutinee, std::vector<MatchBranch> branches, Location loc = {});
  static ExprPtr makeLet(TermId pattern, ExprPtr bound, ExprPtr body, Location loc = {});
  static ExprPtr makeIf(ExprPtr cond, ExprPtr then, ExprPtr otherwise, Location loc = {});
};

bool equal(const Expr& a, const Expr& b);

struct FuncDecl {
  Symbol name = 0;
  std::vector<TypeExpr> params;
  TypeExpr ret;
  Location loc;
  friend bool operator==(const FuncDecl& a, const FuncDecl& b) {
    return a.name == b.name && a.params == b.params && a.ret == b.ret;
  }
};

struct FuncDef {
  Symbol name = 0;
  std::vector<Symbol> params;
  ExprPtr body;
  Location loc;
};

enum class RelKind { Input, Output };

struct RelDecl {
  Symbol name = 0;
  std::vector<TypeExpr> argTypes;
  RelKind kind = RelKind::Output;
  Location loc;
  friend bool operator==(const RelDecl& a, const RelDecl& b) {
    return a.name == b.name && a.argTypes == b.argTypes && a.kind == b.kind;
  }
};

struct Atom {
  Symbol relation = 0;
  std::vector<TermId> args;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Premise {
  enum class Kind { Positive, Negated, Unify };

  Kind kind = Kind::Positive;
  Atom atom;
  TermId lhs = kNoTerm;
  TermId rhs = kNoTerm;
  Location loc;

  static Premise positive(Atom a, Location loc = {}) { return {Kind::Positive, std::move(a), kNoTerm, kNoTerm, loc}; }
  static Premise negated(Atom a, Location loc = {}) { return {Kind::Negated, std::move(a), kNoTerm, kNoTerm, loc}; }
  static Premise unification(TermId l, TermId r, Location loc = {}) { return {Kind::Unify, {}, l, r, loc}; }

  friend bool operator==(const Premise& a, const Premise& b) {
    return a.kind == b.kind && a.atom == b.atom && a.lhs == b.lhs && a.rhs == b.rhs;
  }
};

struct Clause {
  Atom head;
  std::vector<Premise> body;
  Location loc;

  bool isFact() const { return body.empty(); }
  friend bool operator==(const Clause& a, const Clause& b) { return a.head == b.head && a.body == b.body; }
};

struct SourceProgram {
  std::vector<AdtDef> typeDefs;
  std::vector<TypeAlias> aliases;
  std::vector<FuncDecl> funcDecls;
  std::vector<FuncDef> funcDefs;
  std::vector<RelDecl> relDecls;
  std::vector<Clause> clauses;

  std::size_t factCount() const;
  std::size_t ruleCount() const;

  const RelDecl* findRelation(Symbol name) const;
  const FuncDecl* findFuncDecl(Symbol name) const;
  const FuncDef* findFuncDef(Symbol name) const;
};

bool equal(const SourceProgram& a, const SourceProgram& b);

/// Predeclared types: bool_exp, bv32_exp, 'A option, ('K, 'V) map.
const SourceProgram& prelude();

/// Constructor metadata across the prelude and one program.
struct CtorInfo {
  std::string adt;
  std::vector<std::string> typeParams;
  std::vector<TypeExpr> argTypes;
};
const CtorInfo* findCtor(const SourceProgram& p, Symbol name);

enum class Builtin {
  Add, Sub, Mul, Div, Rem,
  Lt, Le, Gt, Ge, Eq, Ne,
  IsSat, Get, Put, Interpolant,
  StringConcat, I32ToString,
};
/// Built-in function named `name`, if any (operators use their symbol).
std::optional<Builtin> findBuiltin(std::string_view name);
std::string_view builtinName(Builtin b);
std::size_t builtinArity(Builtin b);

/// Parses and resolves a complete program.
SourceProgram parse(std::string_view source);

/// Parses one ground term in canonical text form, resolving constructors
/// against `program`. Function calls and variables are rejected.
TermId parseGroundTerm(std::string_view text, const SourceProgram& program);

std::string prettyPrint(const SourceProgram& p);
std::string prettyPrint(const Expr& e);
std::string prettyPrint(const Clause& c);
std::string prettyPrint(const Premise& p);
std::string prettyPrint(const Atom& a);

/// Let and If become Match; the result contains only Term and Match nodes.
ExprPtr desugar(const ExprPtr& e);

/// Free variables of an expression (pattern variables are binders).
std::vector<Symbol> freeVars(const Expr& e);

/// Anonymous variables (`_`) are given internal names with this prefix.
inline constexpr std::string_view kAnonPrefix = "_$";

// Frequently used symbols.
Symbol trueSym();
Symbol falseSym();
TermId trueTerm();
TermId falseTerm();

}  // namespace fmlog::syntax
