#include <array>
#include <unordered_map>

#include "fmlog/smt.hpp"
#include "sat_solver.hpp"

namespace fmlog::smt {

std::int32_t bvSdiv(std::int32_t a, std::int32_t b) {
  if (b == 0) return a < 0 ? 1 : -1;
  if (a == INT32_MIN && b == -1) return INT32_MIN;
  return a / b;
}

std::int32_t bvSrem(std::int32_t a, std::int32_t b) {
  if (b == 0) return a;
  if (a == INT32_MIN && b == -1) return 0;
  return a % b;
}

namespace {

constexpr int kWidth = 32;
using Bv = std::array<Lit, kWidth>;

// Gate-level encoder with constant folding and structural hashing. Variable
// 0 is fixed to true.
class Circuit {
 public:
  explicit Circuit(SatSolver& s) : s_(s) {
    s_.newVar();
    s_.addClause({kTrue});
  }

  static constexpr Lit kTrue = 0;
  static constexpr Lit kFalse = 1;

  Lit fresh() { return mkLit(s_.newVar()); }

  Lit mkAnd(Lit a, Lit b) {
    if (a == kFalse || b == kFalse || a == negate(b)) return kFalse;
    if (a == kTrue || a == b) return b;
    if (b == kTrue) return a;
    if (a > b) std::swap(a, b);
    auto key = (std::uint64_t{a} << 32) | b;
    auto it = ands_.find(key);
    if (it != ands_.end()) return it->second;
    Lit o = fresh();
    s_.addClause({negate(o), a});
    s_.addClause({negate(o), b});
    s_.addClause({o, negate(a), negate(b)});
    ands_.emplace(key, o);
    return o;
  }

  Lit mkOr(Lit a, Lit b) { return negate(mkAnd(negate(a), negate(b))); }

  Lit mkXor(Lit a, Lit b) {
    if (a == kFalse) return b;
    if (b == kFalse) return a;
    if (a == kTrue) return negate(b);
    if (b == kTrue) return negate(a);
    if (a == b) return kFalse;
    if (a == negate(b)) return kTrue;
    bool flip = isNeg(a) != isNeg(b);
    a &= ~1u;
    b &= ~1u;
    if (a > b) std::swap(a, b);
    auto key = (std::uint64_t{a} << 32) | b;
    Lit o;
    auto it = xors_.find(key);
    if (it != xors_.end()) {
      o = it->second;
    } else {
      o = fresh();
      s_.addClause({negate(o), a, b});
      s_.addClause({negate(o), negate(a), negate(b)});
      s_.addClause({o, negate(a), b});
      s_.addClause({o, a, negate(b)});
      xors_.emplace(key, o);
    }
    return flip ? negate(o) : o;
  }

  Lit mkMux(Lit c, Lit t, Lit e) {
    if (c == kTrue || t == e) return t;
    if (c == kFalse) return e;
    return mkOr(mkAnd(c, t), mkAnd(negate(c), e));
  }

  // Sum bits and the final carry of a + b + cin over `n` bits.
  Lit addInto(const Lit* a, const Lit* b, Lit cin, Lit* out, int n) {
    Lit carry = cin;
    for (int i = 0; i < n; ++i) {
      Lit axb = mkXor(a[i], b[i]);
      out[i] = mkXor(axb, carry);
      carry = mkOr(mkAnd(a[i], b[i]), mkAnd(carry, axb));
    }
    return carry;
  }

  Bv constant(std::int32_t v) {
    Bv r;
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < kWidth; ++i) r[i] = (u >> i) & 1u ? kTrue : kFalse;
    return r;
  }

  Bv inverted(const Bv& a) {
    Bv r;
    for (int i = 0; i < kWidth; ++i) r[i] = negate(a[i]);
    return r;
  }

  Bv add(const Bv& a, const Bv& b) {
    Bv r;
    addInto(a.data(), b.data(), kFalse, r.data(), kWidth);
    return r;
  }

  Bv sub(const Bv& a, const Bv& b) {
    Bv r;
    Bv nb = inverted(b);
    addInto(a.data(), nb.data(), kTrue, r.data(), kWidth);
    return r;
  }

  Bv neg(const Bv& a) { return sub(constant(0), a); }

  Bv mul(const Bv& a, const Bv& b) {
    Bv acc = constant(0);
    for (int i = 0; i < kWidth; ++i) {
      if (b[i] == kFalse) continue;
      Bv partial = constant(0);
      for (int j = i; j < kWidth; ++j) partial[j] = mkAnd(a[j - i], b[i]);
      acc = add(acc, partial);
    }
    return acc;
  }

  Bv mux(Lit c, const Bv& t, const Bv& e) {
    Bv r;
    for (int i = 0; i < kWidth; ++i) r[i] = mkMux(c, t[i], e[i]);
    return r;
  }

  // Restoring division. A zero divisor yields all-ones and the dividend,
  // which is the SMT-LIB bvudiv/bvurem convention.
  void udivrem(const Bv& a, const Bv& b, Bv& q, Bv& rem) {
    Bv r = constant(0);
    std::array<Lit, kWidth + 1> nb;
    for (int i = 0; i < kWidth; ++i) nb[i] = negate(b[i]);
    nb[kWidth] = kTrue;
    for (int i = kWidth - 1; i >= 0; --i) {
      std::array<Lit, kWidth + 1> shifted;
      shifted[0] = a[i];
      for (int k = 1; k <= kWidth; ++k) shifted[k] = r[k - 1];
      std::array<Lit, kWidth + 1> diff;
      q[i] = addInto(shifted.data(), nb.data(), kTrue, diff.data(), kWidth + 1);
      for (int k = 0; k < kWidth; ++k) r[k] = mkMux(q[i], diff[k], shifted[k]);
    }
    rem = r;
  }

  Bv sdiv(const Bv& a, const Bv& b) {
    Bv ua = mux(a[kWidth - 1], neg(a), a);
    Bv ub = mux(b[kWidth - 1], neg(b), b);
    Bv q, r;
    udivrem(ua, ub, q, r);
    return mux(mkXor(a[kWidth - 1], b[kWidth - 1]), neg(q), q);
  }

  Bv srem(const Bv& a, const Bv& b) {
    Bv ua = mux(a[kWidth - 1], neg(a), a);
    Bv ub = mux(b[kWidth - 1], neg(b), b);
    Bv q, r;
    udivrem(ua, ub, q, r);
    return mux(a[kWidth - 1], neg(r), r);
  }

  Lit eq(const Bv& a, const Bv& b) {
    Lit r = kTrue;
    for (int i = 0; i < kWidth; ++i) r = mkAnd(r, negate(mkXor(a[i], b[i])));
    return r;
  }

  // Signed less-than: unsigned comparison with the sign bits flipped.
  Lit slt(const Bv& a, const Bv& b) {
    Bv fa = a;
    Bv fb = b;
    fa[kWidth - 1] = negate(fa[kWidth - 1]);
    fb[kWidth - 1] = negate(fb[kWidth - 1]);
    Bv nb = inverted(fb);
    Bv diff;
    Lit noBorrow = addInto(fa.data(), nb.data(), kTrue, diff.data(), kWidth);
    return negate(noBorrow);
  }

 private:
  SatSolver& s_;
  std::unordered_map<std::uint64_t, Lit> ands_;
  std::unordered_map<std::uint64_t, Lit> xors_;
};

struct Names {
  Symbol t = terms::sym("true"), f = terms::sym("false"), notS = terms::sym("not"), andS = terms::sym("and"),
         orS = terms::sym("or"), eq = terms::sym("bv32_eq"), slt = terms::sym("bv32_slt"),
         sgt = terms::sym("bv32_sgt"), cnst = terms::sym("bv32_const"), symb = terms::sym("bv32_sym"),
         neg = terms::sym("bv32_neg"), add = terms::sym("bv32_add"), sub = terms::sym("bv32_sub"),
         div = terms::sym("bv32_div"), mul = terms::sym("bv32_mul"), rem = terms::sym("bv32_rem");
};

const Names& names() {
  static const Names n;
  return n;
}

class Blaster {
 public:
  explicit Blaster(Circuit& c) : c_(c) {}

  Lit formula(TermId t) {
    if (auto it = bools_.find(t); it != bools_.end()) return it->second;
    const Names& n = names();
    const TermNode& nd = shape(t);
    Lit r;
    if (nd.sym == n.t && nd.args.empty()) {
      r = Circuit::kTrue;
    } else if (nd.sym == n.f && nd.args.empty()) {
      r = Circuit::kFalse;
    } else if (nd.sym == n.notS && nd.args.size() == 1) {
      r = negate(formula(nd.args[0]));
    } else if (nd.sym == n.andS && nd.args.size() == 2) {
      r = c_.mkAnd(formula(nd.args[0]), formula(nd.args[1]));
    } else if (nd.sym == n.orS && nd.args.size() == 2) {
      r = c_.mkOr(formula(nd.args[0]), formula(nd.args[1]));
    } else if (nd.sym == n.eq && nd.args.size() == 2) {
      r = c_.eq(vec(nd.args[0]), vec(nd.args[1]));
    } else if (nd.sym == n.slt && nd.args.size() == 2) {
      r = c_.slt(vec(nd.args[0]), vec(nd.args[1]));
    } else if (nd.sym == n.sgt && nd.args.size() == 2) {
      r = c_.slt(vec(nd.args[1]), vec(nd.args[0]));
    } else {
      throw Error(ErrorKind::TranslationError, "not a bool_exp: " + terms::render(t));
    }
    bools_.emplace(t, r);
    return r;
  }

  Bv vec(TermId t) {
    if (auto it = vecs_.find(t); it != vecs_.end()) return it->second;
    const Names& n = names();
    const TermNode& nd = shape(t);
    Bv r;
    auto arg = [&](std::size_t i) { return vec(nd.args[i]); };
    if (nd.sym == n.cnst && nd.args.size() == 1 && terms::node(nd.args[0]).kind == TermKind::Int) {
      r = c_.constant(terms::node(nd.args[0]).value);
    } else if (nd.sym == n.symb && nd.args.size() == 1 && terms::node(nd.args[0]).kind == TermKind::Str) {
      Symbol name = terms::node(nd.args[0]).sym;
      auto it = symbols_.find(name);
      if (it == symbols_.end()) {
        Bv fresh;
        for (Lit& l : fresh) l = c_.fresh();
        it = symbols_.emplace(name, fresh).first;
      }
      r = it->second;
    } else if (nd.sym == n.neg && nd.args.size() == 1) {
      r = c_.neg(arg(0));
    } else if (nd.args.size() == 2 && nd.sym == n.add) {
      r = c_.add(arg(0), arg(1));
    } else if (nd.args.size() == 2 && nd.sym == n.sub) {
      r = c_.sub(arg(0), arg(1));
    } else if (nd.args.size() == 2 && nd.sym == n.mul) {
      r = c_.mul(arg(0), arg(1));
    } else if (nd.args.size() == 2 && nd.sym == n.div) {
      r = c_.sdiv(arg(0), arg(1));
    } else if (nd.args.size() == 2 && nd.sym == n.rem) {
      r = c_.srem(arg(0), arg(1));
    } else {
      throw Error(ErrorKind::TranslationError, "not a bv32_exp: " + terms::render(t));
    }
    vecs_.emplace(t, r);
    return r;
  }

 private:
  static const TermNode& shape(TermId t) {
    const TermNode& nd = terms::node(t);
    if (nd.kind != TermKind::Ctor || !nd.ground)
      throw Error(ErrorKind::TranslationError, "not a ground formula: " + terms::render(t));
    return nd;
  }

  Circuit& c_;
  std::unordered_map<TermId, Lit> bools_;
  std::unordered_map<TermId, Bv> vecs_;
  std::unordered_map<Symbol, Bv> symbols_;
};

}  // namespace

SatResult builtinCheckSat(TermId formula, std::uint64_t conflictBudget) {
  SatSolver solver;
  Circuit circuit(solver);
  Blaster blaster(circuit);
  Lit root = blaster.formula(formula);
  if (root == Circuit::kTrue) return SatResult::Sat;
  if (root == Circuit::kFalse) return SatResult::Unsat;
  solver.addClause({root});
  switch (solver.solve(conflictBudget)) {
    case SatSolver::Result::Sat: return SatResult::Sat;
    case SatSolver::Result::Unsat: return SatResult::Unsat;
    case SatSolver::Result::Unknown: break;
  }
  throw Error(ErrorKind::ResourceLimit,
              "builtin solver gave up after " + std::to_string(conflictBudget) + " conflicts");
}

}  // namespace fmlog::smt
