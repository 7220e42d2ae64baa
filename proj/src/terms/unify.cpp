#include <algorithm>
#include <cassert>
#include <unordered_map>

#include "fmlog/error.hpp"
#include "fmlog/terms.hpp"

namespace fmlog::terms {

std::optional<TermId> Substitution::lookup(Symbol v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const auto& e, Symbol key) { return e.first < key; });
  if (it != entries_.end() && it->first == v) return it->second;
  return std::nullopt;
}

void Substitution::bind(Symbol v, TermId t) {
  assert(isGround(t));
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const auto& e, Symbol key) { return e.first < key; });
  if (it != entries_.end() && it->first == v) {
    it->second = t;
  } else {
    entries_.insert(it, {v, t});
  }
}

TermId apply(const Substitution& s, TermId t) {
  const TermNode& n = node(t);
  if (n.ground || s.empty()) return t;
  if (n.kind == TermKind::Var) return s.lookup(n.sym).value_or(t);
  std::vector<TermId> args;
  args.reserve(n.args.size());
  bool changed = false;
  for (TermId a : n.args) {
    TermId b = apply(s, a);
    changed = changed || b != a;
    args.push_back(b);
  }
  return changed ? store().withArgs(t, args) : t;
}

namespace {

class Unifier {
 public:
  Unifier(Substitution s, const Reducer& reduce, UnifyStats* stats)
      : subst_(std::move(s)), reduce_(reduce), stats_(stats) {}

  std::optional<Substitution> run(TermId a, TermId b) {
    push(a, b);
    while (!work_.empty()) {
      std::uint32_t p = work_.back();
      work_.pop_back();
      if (pairs_[p].done) continue;
      if (!process(p)) return std::nullopt;
    }
    for (const Pair& pair : pairs_) {
      if (pair.done) continue;
      throw Error(ErrorKind::StuckFunction,
                  "cannot unify " + render(apply(subst_, pair.lhs)) + " with " +
                      render(apply(subst_, pair.rhs)) + ": variables never become bound");
    }
    return std::move(subst_);
  }

 private:
  struct Pair {
    TermId lhs;
    TermId rhs;
    bool done = false;
  };

  void push(TermId a, TermId b) {
    pairs_.push_back({a, b});
    work_.push_back(static_cast<std::uint32_t>(pairs_.size() - 1));
  }

  void park(std::uint32_t p, const std::vector<Symbol>& vars) {
    for (Symbol v : vars) parked_[v].push_back(p);
  }

  void bind(Symbol v, TermId value) {
    subst_.bind(v, value);
    auto it = parked_.find(v);
    if (it == parked_.end()) return;
    for (std::uint32_t p : it->second)
      if (!pairs_[p].done) work_.push_back(p);
    parked_.erase(it);
  }

  // Ground form of `t` under the current bindings, reducing calls
  // innermost-first. Returns kNoTerm and fills `missing` when some
  // variable is still unbound.
  TermId ground(TermId t, std::vector<Symbol>& missing) {
    const TermNode& n = node(t);
    if (n.ground) return t;
    if (n.kind == TermKind::Var) {
      if (auto v = subst_.lookup(n.sym)) return *v;
      if (std::find(missing.begin(), missing.end(), n.sym) == missing.end()) missing.push_back(n.sym);
      return kNoTerm;
    }
    std::vector<TermId> args;
    args.reserve(n.args.size());
    bool ok = true;
    for (TermId a : n.args) {
      TermId g = ground(a, missing);
      ok = ok && g != kNoTerm;
      args.push_back(g);
    }
    if (!ok) return kNoTerm;
    TermId rebuilt = store().withArgs(t, args);
    if (n.kind == TermKind::Call) return reduce_(rebuilt);
    return rebuilt;
  }

  // Resolve one side: bound variables become their values, reducible calls
  // are reduced. Returns kNoTerm if the side is a call waiting on `missing`.
  TermId normalize(TermId t, std::vector<Symbol>& missing) {
    const TermNode& n = node(t);
    if (n.kind == TermKind::Var) {
      if (auto v = subst_.lookup(n.sym)) return *v;
      return t;
    }
    if (n.kind == TermKind::Call) return ground(t, missing);
    return t;
  }

  bool process(std::uint32_t p) {
    if (stats_) ++stats_->pairVisits;
    std::vector<Symbol> missing;
    TermId x = normalize(pairs_[p].lhs, missing);
    if (x == kNoTerm) {
      park(p, missing);
      return true;
    }
    TermId y = normalize(pairs_[p].rhs, missing);
    if (y == kNoTerm) {
      park(p, missing);
      return true;
    }
    if (x == y) {
      pairs_[p].done = true;
      return true;
    }
    const TermNode& nx = node(x);
    const TermNode& ny = node(y);
    if (nx.kind == TermKind::Var || ny.kind == TermKind::Var) {
      bool xVar = nx.kind == TermKind::Var;
      Symbol v = xVar ? nx.sym : ny.sym;
      TermId other = xVar ? y : x;
      TermId g = ground(other, missing);
      if (g == kNoTerm) {
        missing.push_back(v);
        park(p, missing);
        return true;
      }
      pairs_[p].done = true;
      bind(v, g);
      return true;
    }
    if (nx.ground && ny.ground) return false;
    if (nx.kind != ny.kind || nx.sym != ny.sym || nx.value != ny.value || nx.args.size() != ny.args.size())
      return false;
    pairs_[p].done = true;
    std::vector<TermId> xa = nx.args, ya = ny.args;
    for (std::size_t i = xa.size(); i-- > 0;) push(xa[i], ya[i]);
    return true;
  }

  Substitution subst_;
  const Reducer& reduce_;
  UnifyStats* stats_;
  std::vector<Pair> pairs_;
  std::vector<std::uint32_t> work_;
  std::unordered_map<Symbol, std::vector<std::uint32_t>> parked_;
};

}  // namespace

std::optional<Substitution> unify(TermId a, TermId b, const Substitution& s, const Reducer& reduce,
                                  UnifyStats* stats) {
  return Unifier(s, reduce, stats).run(a, b);
}

}  // namespace fmlog::terms
