#pragma once

// Interpreter for the pure functional fragment. Every call takes ground
// arguments and produces a ground term.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>

#include "fmlog/syntax.hpp"

namespace fmlog::funceval {

struct Options {
  std::uint64_t stepBudget = 100'000'000;
  // Maximum number of memoized calls; 0 disables the cache.
  std::size_t cacheCapacity = 1u << 20;
  // Nesting limit for function calls and match evaluation.
  int maxDepth = 20'000;
};

/// Hooks for built-ins that need the solver.
struct Services {
  std::function<bool(TermId formula)> isSat;
  std::function<TermId(TermId a, TermId b)> interpolant;
};

/// Bindings for a pattern matched against a ground value, extending `s`.
/// Pattern variables replace existing bindings of the same name.
std::optional<terms::Substitution> matchPattern(TermId pattern, TermId value, terms::Substitution s = {});

/// `==` on ground terms: identity of interned terms.
inline bool builtinEq(TermId a, TermId b) { return a == b; }

class FunctionTable {
 public:
  FunctionTable(const syntax::SourceProgram& program, Services services = {}, Options options = {});
  ~FunctionTable();
  FunctionTable(const FunctionTable&) = delete;
  FunctionTable& operator=(const FunctionTable&) = delete;

  /// Reduces a call whose arguments are ground. Safe for concurrent use.
  TermId reduce(TermId call) const;

  /// Applies `name` to ground arguments.
  TermId call(Symbol name, const std::vector<TermId>& args) const;

  /// A reducer for terms::unify bound to this table.
  terms::Reducer reducer() const {
    return [this](TermId c) { return reduce(c); };
  }

  std::uint64_t cacheHits() const { return hits_.load(std::memory_order_relaxed); }
  std::uint64_t cacheMisses() const { return misses_.load(std::memory_order_relaxed); }
  std::size_t cacheSize() const;
  const Options& options() const { return options_; }

 private:
  struct Function {
    std::vector<Symbol> params;
    syntax::ExprPtr body;  // desugared
  };
  struct Context;
  struct CacheShard;

  TermId evalExpr(const syntax::Expr& e, const terms::Substitution& env, Context& ctx) const;
  TermId evalTerm(TermId t, const terms::Substitution& env, Context& ctx) const;
  TermId apply(Symbol name, const std::vector<TermId>& args, Context& ctx) const;
  TermId applyBuiltin(syntax::Builtin b, const std::vector<TermId>& args) const;

  std::unordered_map<Symbol, Function> functions_;
  Services services_;
  Options options_;
  static constexpr std::size_t kShards = 32;
  std::unique_ptr<CacheShard[]> cache_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

}  // namespace fmlog::funceval
