#pragma once

// Conflict-driven clause learning over CNF: two watched literals, first-UIP
// learning, VSIDS branching, phase saving, Luby restarts.

#include <cstdint>
#include <vector>

namespace fmlog::smt {

/// Literal encoding: 2*var for positive, 2*var+1 for negated.
using Lit = std::uint32_t;
inline Lit mkLit(std::uint32_t var, bool negated = false) { return 2 * var + (negated ? 1 : 0); }
inline Lit negate(Lit l) { return l ^ 1u; }
inline std::uint32_t varOf(Lit l) { return l >> 1; }
inline bool isNeg(Lit l) { return l & 1u; }

class SatSolver {
 public:
  enum class Result { Sat, Unsat, Unknown };

  std::uint32_t newVar();
  std::uint32_t numVars() const { return static_cast<std::uint32_t>(assign_.size()); }
  /// Adds a clause at decision level 0. Returns false once the formula is
  /// known to be unsatisfiable.
  bool addClause(std::vector<Lit> lits);
  Result solve(std::uint64_t conflictBudget);
  /// Value of `var` in the model found by the last Sat answer.
  bool modelValue(std::uint32_t var) const { return model_[var]; }
  std::uint64_t conflicts() const { return conflicts_; }

 private:
  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0;
  };
  struct Watcher {
    std::uint32_t cref;
    Lit blocker;
  };
  static constexpr std::uint32_t kNoReason = UINT32_MAX;

  // +1 true, -1 false, 0 unassigned.
  int value(Lit l) const {
    int v = assign_[varOf(l)];
    return isNeg(l) ? -v : v;
  }
  int level() const { return static_cast<int>(trailLim_.size()); }
  void enqueue(Lit l, std::uint32_t reason);
  std::uint32_t propagate();
  void analyze(std::uint32_t conflict, std::vector<Lit>& learnt, int& backLevel);
  bool redundant(Lit l) const;
  void backtrack(int lvl);
  Lit pickBranch();
  void attach(std::uint32_t cref);
  void bumpVar(std::uint32_t v);
  void bumpClause(Clause& c);
  void reduceLearnts();

  // Binary max-heap of unassigned-candidate variables keyed by activity.
  void heapInsert(std::uint32_t v);
  std::uint32_t heapPop();
  void heapUp(std::size_t i);
  void heapDown(std::size_t i);
  bool heapLess(std::uint32_t a, std::uint32_t b) const { return activity_[a] > activity_[b]; }

  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<int> assign_;
  std::vector<int> levelOf_;
  std::vector<std::uint32_t> reason_;
  std::vector<char> phase_;
  std::vector<char> seen_;
  std::vector<double> activity_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trailLim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint32_t> heap_;
  std::vector<int> heapIndex_;
  std::vector<char> model_;
  double varInc_ = 1.0;
  double clauseInc_ = 1.0;
  bool unsat_ = false;
  std::uint64_t conflicts_ = 0;
};

}  // namespace fmlog::smt
