#include "fmlog/funceval.hpp"

#include <climits>
#include <mutex>

namespace fmlog::funceval {

using syntax::Builtin;
using syntax::Expr;
using terms::Substitution;

std::optional<Substitution> matchPattern(TermId pattern, TermId value, Substitution s) {
  const TermNode& p = terms::node(pattern);
  if (p.kind == TermKind::Var) {
    s.bind(p.sym, value);
    return s;
  }
  if (p.ground) {
    if (pattern == value) return s;
    return std::nullopt;
  }
  const TermNode& v = terms::node(value);
  if (p.kind != v.kind || p.sym != v.sym || p.args.size() != v.args.size()) return std::nullopt;
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    auto next = matchPattern(p.args[i], v.args[i], std::move(s));
    if (!next) return std::nullopt;
    s = std::move(*next);
  }
  return s;
}

struct FunctionTable::Context {
  std::uint64_t steps = 0;
  int depth = 0;
};

struct FunctionTable::CacheShard {
  std::mutex mu;
  std::unordered_map<TermId, TermId> map;
};

FunctionTable::FunctionTable(const syntax::SourceProgram& program, Services services, Options options)
    : services_(std::move(services)), options_(options), cache_(new CacheShard[kShards]) {
  for (const syntax::FuncDef& f : program.funcDefs) functions_[f.name] = {f.params, syntax::desugar(f.body)};
}

FunctionTable::~FunctionTable() = default;

std::size_t FunctionTable::cacheSize() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kShards; ++i) {
    std::lock_guard<std::mutex> lock(cache_[i].mu);
    n += cache_[i].map.size();
  }
  return n;
}

TermId FunctionTable::reduce(TermId callTerm) const {
  const TermNode& n = terms::node(callTerm);
  Context ctx;
  return apply(n.sym, n.args, ctx);
}

TermId FunctionTable::call(Symbol name, const std::vector<TermId>& args) const {
  Context ctx;
  return apply(name, args, ctx);
}

TermId FunctionTable::apply(Symbol name, const std::vector<TermId>& args, Context& ctx) const {
  const std::string& fname = terms::symName(name);
  if (auto b = syntax::findBuiltin(fname)) return applyBuiltin(*b, args);

  auto it = functions_.find(name);
  if (it == functions_.end()) throw Error(ErrorKind::MatchFailure, "call to undefined function " + fname);
  const Function& f = it->second;

  const bool caching = options_.cacheCapacity > 0;
  TermId key = kNoTerm;
  CacheShard* shard = nullptr;
  if (caching) {
    key = terms::store().call(name, args);
    shard = &cache_[key % kShards];
    std::lock_guard<std::mutex> lock(shard->mu);
    auto hit = shard->map.find(key);
    if (hit != shard->map.end()) {
      hits_.fetch_add(1, std::memory_order_relaxed);
      return hit->second;
    }
  }
  misses_.fetch_add(1, std::memory_order_relaxed);

  if (++ctx.depth > options_.maxDepth)
    throw Error(ErrorKind::StepLimitExceeded,
                "call nesting exceeded " + std::to_string(options_.maxDepth) + " in " + fname);
  Substitution env;
  for (std::size_t i = 0; i < f.params.size(); ++i) env.bind(f.params[i], args[i]);
  TermId result = evalExpr(*f.body, env, ctx);
  --ctx.depth;

  if (caching) {
    std::lock_guard<std::mutex> lock(shard->mu);
    if (shard->map.size() < (options_.cacheCapacity + kShards - 1) / kShards) shard->map[key] = result;
  }
  return result;
}

TermId FunctionTable::evalExpr(const Expr& e, const Substitution& env, Context& ctx) const {
  if (++ctx.steps > options_.stepBudget)
    throw Error(ErrorKind::StepLimitExceeded,
                "reduction exceeded the step budget of " + std::to_string(options_.stepBudget), e.loc);
  if (e.kind == Expr::Kind::Term) return evalTerm(e.term, env, ctx);

  // Only Term and Match survive desugaring.
  TermId value = evalExpr(*e.scrutinee, env, ctx);
  for (const syntax::MatchBranch& b : e.branches) {
    if (auto s = matchPattern(b.pattern, value, env)) {
      if (++ctx.depth > options_.maxDepth)
        throw Error(ErrorKind::StepLimitExceeded, "evaluation nesting exceeded " + std::to_string(options_.maxDepth),
                    e.loc);
      TermId r = evalExpr(*b.body, *s, ctx);
      --ctx.depth;
      return r;
    }
  }
  throw Error(ErrorKind::MatchFailure, "no pattern matches " + terms::render(value), e.loc);
}

TermId FunctionTable::evalTerm(TermId t, const Substitution& env, Context& ctx) const {
  const TermNode& n = terms::node(t);
  if (n.ground) return t;
  if (n.kind == TermKind::Var) {
    if (auto v = env.lookup(n.sym)) return *v;
    throw Error(ErrorKind::StuckFunction, "unbound variable " + terms::symName(n.sym) + " during reduction");
  }
  std::vector<TermId> args;
  args.reserve(n.args.size());
  for (TermId a : n.args) args.push_back(evalTerm(a, env, ctx));
  if (n.kind == TermKind::Call) return apply(n.sym, args, ctx);
  return terms::store().withArgs(t, args);
}

namespace {

TermId boolTerm(bool b) { return b ? syntax::trueTerm() : syntax::falseTerm(); }

std::int32_t intArg(TermId t) {
  const TermNode& n = terms::node(t);
  if (n.kind != TermKind::Int) throw Error(ErrorKind::TranslationError, "expected an integer, got " + terms::render(t));
  return n.value;
}

std::int32_t wrap(std::int64_t v) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(v)); }

}  // namespace

TermId FunctionTable::applyBuiltin(Builtin b, const std::vector<TermId>& args) const {
  TermStore& st = terms::store();
  switch (b) {
    case Builtin::Add: return st.integer(wrap(std::int64_t{intArg(args[0])} + intArg(args[1])));
    case Builtin::Sub: return st.integer(wrap(std::int64_t{intArg(args[0])} - intArg(args[1])));
    case Builtin::Mul: return st.integer(wrap(std::int64_t{intArg(args[0])} * intArg(args[1])));
    case Builtin::Div:
    case Builtin::Rem: {
      std::int32_t x = intArg(args[0]);
      std::int32_t y = intArg(args[1]);
      if (y == 0)
        throw Error(ErrorKind::DivisionByZero,
                    std::string(b == Builtin::Div ? "division" : "remainder") + " by zero: " + std::to_string(x) +
                        (b == Builtin::Div ? " / 0" : " % 0"));
      if (x == INT32_MIN && y == -1) return st.integer(b == Builtin::Div ? INT32_MIN : 0);
      return st.integer(b == Builtin::Div ? x / y : x % y);
    }
    case Builtin::Lt: return boolTerm(intArg(args[0]) < intArg(args[1]));
    case Builtin::Le: return boolTerm(intArg(args[0]) <= intArg(args[1]));
    case Builtin::Gt: return boolTerm(intArg(args[0]) > intArg(args[1]));
    case Builtin::Ge: return boolTerm(intArg(args[0]) >= intArg(args[1]));
    case Builtin::Eq: return boolTerm(builtinEq(args[0], args[1]));
    case Builtin::Ne: return boolTerm(!builtinEq(args[0], args[1]));
    case Builtin::IsSat:
      if (!services_.isSat) throw Error(ErrorKind::BackendUnavailable, "is_sat called but no solver is configured");
      return boolTerm(services_.isSat(args[0]));
    case Builtin::Get: {
      static const Symbol mcons = terms::sym("mcons");
      TermId m = args[1];
      while (true) {
        const TermNode& n = terms::node(m);
        if (n.kind != TermKind::Ctor || n.sym != mcons) return st.ctor(terms::sym("none"));
        if (n.args[0] == args[0]) return st.ctor(terms::sym("some"), std::vector<TermId>{n.args[1]});
        m = n.args[2];
      }
    }
    case Builtin::Put: return st.ctor(terms::sym("mcons"), args);
    case Builtin::Interpolant:
      if (!services_.interpolant)
        throw Error(ErrorKind::UnsupportedOperation, "interpolant: not supported by the configured solver");
      return services_.interpolant(args[0], args[1]);
    case Builtin::StringConcat:
      return st.string(terms::symName(terms::node(args[0]).sym) + terms::symName(terms::node(args[1]).sym));
    case Builtin::I32ToString: return st.string(std::to_string(intArg(args[0])));
  }
  throw Error(ErrorKind::UnsupportedOperation, "unknown built-in");
}

}  // namespace fmlog::funceval
