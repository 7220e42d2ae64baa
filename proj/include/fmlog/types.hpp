#pragma once

// Unification-based type checking with parametric ADTs and polymorphic
// function signatures. Types are discarded once checking succeeds.

#include <map>
#include <memory>
#include <string>

#include "fmlog/syntax.hpp"

namespace fmlog::types {

using syntax::TypeExpr;

struct TypeEnv {
  // Types of term variables within the clause or function being checked.
  std::map<Symbol, TypeExpr> bindings;
  // Kept idempotent: no key occurs in any value.
  std::map<std::string, TypeExpr> substitution;

  /// `t` with the substitution applied.
  TypeExpr resolve(const TypeExpr& t) const;
};

/// Extends `env` so that `a` and `b` become equal. Throws TypeMismatch or
/// OccursCheckFailure.
TypeEnv unifyTypes(const TypeExpr& a, const TypeExpr& b, TypeEnv env);

/// In-place variant used by the checker.
void unifyInto(const TypeExpr& a, const TypeExpr& b, TypeEnv& env);

/// Declared signature of a built-in function as (parameter types, result).
std::pair<std::vector<TypeExpr>, TypeExpr> builtinSignature(syntax::Builtin b);

/// Checks every clause, fact and function body against the declarations.
/// Throws TypeError carrying a location and the two conflicting types.
void checkProgram(const syntax::SourceProgram& p);

/// Checks atoms supplied from outside the source, such as fact files.
class FactChecker {
 public:
  explicit FactChecker(const syntax::SourceProgram& p);
  ~FactChecker();
  void check(const syntax::Atom& a, Location loc = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fmlog::types
