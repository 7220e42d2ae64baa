#include "sat_solver.hpp"

#include <algorithm>

namespace fmlog::smt {

namespace {

double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

}  // namespace

std::uint32_t SatSolver::newVar() {
  auto v = static_cast<std::uint32_t>(assign_.size());
  assign_.push_back(0);
  levelOf_.push_back(0);
  reason_.push_back(kNoReason);
  phase_.push_back(0);
  seen_.push_back(0);
  activity_.push_back(0);
  heapIndex_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  heapInsert(v);
  return v;
}

bool SatSolver::addClause(std::vector<Lit> lits) {
  if (unsat_) return false;
  std::sort(lits.begin(), lits.end());
  std::vector<Lit> kept;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    Lit l = lits[i];
    if (value(l) == 1) return true;
    if (i + 1 < lits.size() && lits[i + 1] == negate(l)) return true;
    if (value(l) == -1 || (!kept.empty() && kept.back() == l)) continue;
    kept.push_back(l);
  }
  if (kept.empty()) {
    unsat_ = true;
    return false;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], kNoReason);
    if (propagate() != kNoReason) unsat_ = true;
    return !unsat_;
  }
  clauses_.push_back(Clause{std::move(kept)});
  attach(static_cast<std::uint32_t>(clauses_.size() - 1));
  return true;
}

void SatSolver::attach(std::uint32_t cref) {
  const Clause& c = clauses_[cref];
  watches_[c.lits[0]].push_back({cref, c.lits[1]});
  watches_[c.lits[1]].push_back({cref, c.lits[0]});
}

void SatSolver::enqueue(Lit l, std::uint32_t reason) {
  std::uint32_t v = varOf(l);
  assign_[v] = isNeg(l) ? -1 : 1;
  levelOf_[v] = level();
  reason_[v] = reason;
  trail_.push_back(l);
}

// Watch lists are keyed by the watched literal itself and visited when it
// becomes false. The implied literal of a reason clause sits at lits[0].
std::uint32_t SatSolver::propagate() {
  while (qhead_ < trail_.size()) {
    Lit falseLit = negate(trail_[qhead_++]);
    std::vector<Watcher>& ws = watches_[falseLit];
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ws.size()) {
      Watcher w = ws[i];
      if (value(w.blocker) == 1) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause& c = clauses_[w.cref];
      ++i;
      if (c.lits[0] == falseLit) std::swap(c.lits[0], c.lits[1]);
      Lit first = c.lits[0];
      if (first != w.blocker && value(first) == 1) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != -1) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[c.lits[1]].push_back({w.cref, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == -1) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return w.cref;
      }
      enqueue(first, w.cref);
    }
    ws.resize(j);
  }
  return kNoReason;
}

bool SatSolver::redundant(Lit l) const {
  std::uint32_t r = reason_[varOf(l)];
  if (r == kNoReason) return false;
  const Clause& c = clauses_[r];
  for (std::size_t k = 1; k < c.lits.size(); ++k) {
    std::uint32_t v = varOf(c.lits[k]);
    if (!seen_[v] && levelOf_[v] > 0) return false;
  }
  return true;
}

void SatSolver::analyze(std::uint32_t conflict, std::vector<Lit>& learnt, int& backLevel) {
  learnt.assign(1, 0);
  int pathCount = 0;
  bool haveP = false;
  Lit p = 0;
  std::size_t idx = trail_.size();
  std::uint32_t cref = conflict;
  do {
    Clause& c = clauses_[cref];
    if (c.learnt) bumpClause(c);
    for (std::size_t k = haveP ? 1 : 0; k < c.lits.size(); ++k) {
      Lit q = c.lits[k];
      std::uint32_t v = varOf(q);
      if (seen_[v] || levelOf_[v] == 0) continue;
      seen_[v] = 1;
      bumpVar(v);
      if (levelOf_[v] >= level()) {
        ++pathCount;
      } else {
        learnt.push_back(q);
      }
    }
    while (!seen_[varOf(trail_[--idx])]) {
    }
    p = trail_[idx];
    haveP = true;
    cref = reason_[varOf(p)];
    seen_[varOf(p)] = 0;
    --pathCount;
  } while (pathCount > 0);
  learnt[0] = negate(p);

  std::vector<Lit> toClear(learnt.begin() + 1, learnt.end());
  std::size_t out = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k)
    if (!redundant(learnt[k])) learnt[out++] = learnt[k];
  learnt.resize(out);
  for (Lit l : toClear) seen_[varOf(l)] = 0;

  backLevel = 0;
  if (learnt.size() > 1) {
    std::size_t best = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (levelOf_[varOf(learnt[k])] > levelOf_[varOf(learnt[best])]) best = k;
    std::swap(learnt[1], learnt[best]);
    backLevel = levelOf_[varOf(learnt[1])];
  }
}

void SatSolver::backtrack(int lvl) {
  if (level() <= lvl) return;
  for (std::size_t k = trail_.size(); k-- > trailLim_[lvl];) {
    std::uint32_t v = varOf(trail_[k]);
    phase_[v] = assign_[v] > 0;
    assign_[v] = 0;
    reason_[v] = kNoReason;
    if (heapIndex_[v] < 0) heapInsert(v);
  }
  trail_.resize(trailLim_[lvl]);
  trailLim_.resize(lvl);
  qhead_ = trail_.size();
}

Lit SatSolver::pickBranch() {
  while (!heap_.empty()) {
    std::uint32_t v = heapPop();
    if (assign_[v] == 0) return mkLit(v, !phase_[v]);
  }
  return UINT32_MAX;
}

void SatSolver::bumpVar(std::uint32_t v) {
  activity_[v] += varInc_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    varInc_ *= 1e-100;
  }
  if (heapIndex_[v] >= 0) heapUp(static_cast<std::size_t>(heapIndex_[v]));
}

void SatSolver::bumpClause(Clause& c) {
  c.activity += clauseInc_;
  if (c.activity > 1e20) {
    for (std::uint32_t r : learnts_) clauses_[r].activity *= 1e-20;
    clauseInc_ *= 1e-20;
  }
}

void SatSolver::reduceLearnts() {
  auto locked = [&](std::uint32_t r) {
    const Clause& c = clauses_[r];
    return reason_[varOf(c.lits[0])] == r && value(c.lits[0]) == 1;
  };
  std::sort(learnts_.begin(), learnts_.end(),
            [&](std::uint32_t a, std::uint32_t b) { return clauses_[a].activity < clauses_[b].activity; });
  std::vector<std::uint32_t> keep;
  for (std::size_t k = 0; k < learnts_.size(); ++k) {
    Clause& c = clauses_[learnts_[k]];
    if (k < learnts_.size() / 2 && c.lits.size() > 2 && !locked(learnts_[k])) {
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
    } else {
      keep.push_back(learnts_[k]);
    }
  }
  learnts_ = std::move(keep);
  for (auto& ws : watches_) ws.clear();
  for (std::uint32_t r = 0; r < clauses_.size(); ++r)
    if (!clauses_[r].deleted) attach(r);
}

SatSolver::Result SatSolver::solve(std::uint64_t conflictBudget) {
  if (unsat_) return Result::Unsat;
  if (propagate() != kNoReason) {
    unsat_ = true;
    return Result::Unsat;
  }
  std::uint64_t spent = 0;
  double maxLearnts = std::max<double>(static_cast<double>(clauses_.size()) / 3.0, 4000.0);
  std::vector<Lit> learnt;
  for (int restart = 0;; ++restart) {
    auto limit = static_cast<std::uint64_t>(luby(2, restart) * 100);
    std::uint64_t local = 0;
    while (true) {
      std::uint32_t conflict = propagate();
      if (conflict != kNoReason) {
        ++conflicts_;
        ++spent;
        ++local;
        if (level() == 0) {
          unsat_ = true;
          return Result::Unsat;
        }
        int backLevel = 0;
        analyze(conflict, learnt, backLevel);
        backtrack(backLevel);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          clauses_.push_back(Clause{learnt, true});
          auto r = static_cast<std::uint32_t>(clauses_.size() - 1);
          attach(r);
          learnts_.push_back(r);
          bumpClause(clauses_[r]);
          enqueue(learnt[0], r);
        }
        varInc_ /= 0.95;
        clauseInc_ /= 0.999;
        if (spent >= conflictBudget) {
          backtrack(0);
          return Result::Unknown;
        }
        continue;
      }
      if (local >= limit) {
        backtrack(0);
        break;
      }
      if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= maxLearnts) {
        reduceLearnts();
        maxLearnts *= 1.1;
      }
      Lit d = pickBranch();
      if (d == UINT32_MAX) {
        model_.assign(assign_.size(), 0);
        for (std::size_t v = 0; v < assign_.size(); ++v) model_[v] = assign_[v] > 0;
        backtrack(0);
        return Result::Sat;
      }
      trailLim_.push_back(trail_.size());
      enqueue(d, kNoReason);
    }
  }
}

void SatSolver::heapInsert(std::uint32_t v) {
  heapIndex_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heapUp(heap_.size() - 1);
}

std::uint32_t SatSolver::heapPop() {
  std::uint32_t top = heap_[0];
  heapIndex_[top] = -1;
  heap_[0] = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heapIndex_[heap_[0]] = 0;
    heapDown(0);
  }
  return top;
}

void SatSolver::heapUp(std::size_t i) {
  std::uint32_t v = heap_[i];
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    if (!heapLess(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heapIndex_[heap_[i]] = static_cast<int>(i);
    i = parent;
  }
  heap_[i] = v;
  heapIndex_[v] = static_cast<int>(i);
}

void SatSolver::heapDown(std::size_t i) {
  std::uint32_t v = heap_[i];
  while (true) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && heapLess(heap_[child + 1], heap_[child])) ++child;
    if (!heapLess(heap_[child], v)) break;
    heap_[i] = heap_[child];
    heapIndex_[heap_[i]] = static_cast<int>(i);
    i = child;
  }
  heap_[i] = v;
  heapIndex_[v] = static_cast<int>(i);
}

}  // namespace fmlog::smt
