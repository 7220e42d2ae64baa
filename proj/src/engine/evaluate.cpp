#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "fmlog/engine.hpp"

namespace fmlog::engine {

using syntax::Premise;
using terms::Substitution;
using validate::OrderedRule;

TermId evalGround(TermId t, const funceval::FunctionTable& fns) {
  const TermNode& n = terms::node(t);
  if (n.ground) return t;
  if (n.kind == TermKind::Var)
    throw Error(ErrorKind::StuckFunction, "variable " + terms::symName(n.sym) + " is unbound");
  std::vector<TermId> args;
  args.reserve(n.args.size());
  for (TermId a : n.args) args.push_back(evalGround(a, fns));
  if (n.kind == TermKind::Call) return fns.call(n.sym, args);
  return terms::store().withArgs(t, args);
}

namespace {

constexpr std::size_t kNoTrigger = SIZE_MAX;

std::string ruleText(const OrderedRule& r) {
  std::string s = syntax::prettyPrint(r.head) + " :- ";
  // Shown in source order so the message matches what the user wrote.
  std::vector<std::size_t> byOriginal(r.body.size());
  for (std::size_t i = 0; i < r.body.size(); ++i) byOriginal[r.originalIndex[i]] = i;
  for (std::size_t i = 0; i < byOriginal.size(); ++i) s += (i ? ", " : "") + syntax::prettyPrint(r.body[byOriginal[i]]);
  return s + ".";
}

[[noreturn]] void failInRule(const Error& e, const OrderedRule& r, const Substitution& s) {
  std::string msg = e.detail() + "\n  in rule: " + ruleText(r);
  if (!s.empty()) {
    msg += "\n  with bindings:";
    for (auto [v, t] : s.entries()) msg += " " + terms::symName(v) + " = " + terms::render(t) + ";";
  }
  throw Error(e.kind(), msg, e.location().known() ? e.location() : r.loc);
}

// A way of running a rule body: premises in `order`; premise `trigger`
// (when set) is matched against one given fact instead of the database.
struct Plan {
  const OrderedRule* rule = nullptr;
  std::size_t trigger = kNoTrigger;
  std::vector<std::size_t> order;
  // Variables of each argument of each premise atom.
  std::vector<std::vector<std::vector<Symbol>>> argVars;
};

void fillArgVars(Plan& p) {
  for (const Premise& pr : p.rule->body) {
    std::vector<std::vector<Symbol>> vars;
    for (TermId a : pr.atom.args) {
      std::vector<Symbol> vs;
      terms::collectVars(a, vs);
      vars.push_back(std::move(vs));
    }
    p.argVars.push_back(std::move(vars));
  }
}

Plan seedPlan(const OrderedRule& r) {
  Plan p;
  p.rule = &r;
  for (std::size_t i = 0; i < r.body.size(); ++i) p.order.push_back(i);
  fillArgVars(p);
  return p;
}

bool hasCalls(const syntax::Atom& a) {
  return std::any_of(a.args.begin(), a.args.end(), [](TermId t) { return terms::node(t).hasCall; });
}

// The trigger premise goes first when it can be matched with nothing bound;
// the rest follow greedily, which cannot get stuck because binding more
// variables never makes a premise less evaluable.
Plan triggerPlan(const OrderedRule& r, std::size_t trigger) {
  Plan p = seedPlan(r);
  p.trigger = trigger;
  if (hasCalls(r.body[trigger].atom)) return p;
  std::vector<Symbol> bound;
  for (TermId a : r.body[trigger].atom.args) terms::collectVars(a, bound);
  std::sort(bound.begin(), bound.end());
  bound.erase(std::unique(bound.begin(), bound.end()), bound.end());
  std::vector<std::size_t> order = {trigger};
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < r.body.size(); ++i)
    if (i != trigger) rest.push_back(i);
  while (!rest.empty()) {
    auto it = rest.begin();
    std::vector<Symbol> after;
    while (it != rest.end() && !validate::evaluable(r.body[*it], bound, &after)) ++it;
    if (it == rest.end()) return p;
    order.push_back(*it);
    bound = std::move(after);
    rest.erase(it);
  }
  p.order = std::move(order);
  return p;
}

class Matcher {
 public:
  Matcher(const FactDatabase& db, const funceval::FunctionTable& fns) : db_(db), fns_(fns), reduce_(fns.reducer()) {}

  template <class Emit>
  void run(const Plan& plan, TermId triggerFact, Emit&& emit) {
    step(plan, 0, Substitution{}, triggerFact, emit);
  }

 private:
  template <class Emit>
  void step(const Plan& plan, std::size_t pos, const Substitution& s, TermId triggerFact, Emit& emit) {
    const OrderedRule& rule = *plan.rule;
    if (pos == plan.order.size()) {
      TermId head;
      try {
        std::vector<TermId> args;
        for (TermId a : rule.head.args) args.push_back(evalGround(terms::apply(s, a), fns_));
        head = terms::store().tuple(args);
      } catch (const Error& e) {
        failInRule(e, rule, s);
      }
      emit(rule.head.relation, head);
      return;
    }
    std::size_t idx = plan.order[pos];
    const Premise& pr = rule.body[idx];
    switch (pr.kind) {
      case Premise::Kind::Unify: {
        std::optional<Substitution> next;
        try {
          next = terms::unify(pr.lhs, pr.rhs, s, reduce_);
        } catch (const Error& e) {
          failInRule(e, rule, s);
        }
        if (next) step(plan, pos + 1, *next, triggerFact, emit);
        return;
      }
      case Premise::Kind::Negated: {
        bool present;
        try {
          std::vector<TermId> args;
          for (TermId a : pr.atom.args) args.push_back(evalGround(terms::apply(s, a), fns_));
          present = db_.contains(pr.atom.relation, terms::store().tuple(args));
        } catch (const Error& e) {
          failInRule(e, rule, s);
        }
        if (!present) step(plan, pos + 1, s, triggerFact, emit);
        return;
      }
      case Premise::Kind::Positive: break;
    }

    const auto& vars = plan.argVars[idx];
    const std::size_t arity = pr.atom.args.size();
    PositionMask mask = 0;
    std::vector<TermId> candidates;
    try {
      if (idx == plan.trigger) {
        candidates.push_back(triggerFact);
      } else {
        std::vector<TermId> key;
        for (std::size_t j = 0; j < arity && j < 64; ++j) {
          if (!std::all_of(vars[j].begin(), vars[j].end(), [&](Symbol v) { return s.bound(v); })) continue;
          mask |= PositionMask{1} << j;
          key.push_back(evalGround(terms::apply(s, pr.atom.args[j]), fns_));
        }
        candidates = db_.lookup(pr.atom.relation, mask, terms::store().tuple(key));
      }
    } catch (const Error& e) {
      failInRule(e, rule, s);
    }
    for (TermId fact : candidates) {
      const TermNode& fn = terms::node(fact);
      if (fn.args.size() != arity) continue;
      std::optional<Substitution> cur = s;
      try {
        for (std::size_t j = 0; j < arity && cur; ++j) {
          if (mask >> j & 1u) continue;
          cur = terms::unify(pr.atom.args[j], fn.args[j], *cur, reduce_);
        }
      } catch (const Error& e) {
        failInRule(e, rule, s);
      }
      if (cur) step(plan, pos + 1, *cur, triggerFact, emit);
    }
  }

  const FactDatabase& db_;
  const funceval::FunctionTable& fns_;
  terms::Reducer reduce_;
};

struct Job {
  const Plan* plan = nullptr;
  std::vector<TermId> facts;  // empty for a seed job
};

// Per-worker deques; owners pop from the back, thieves take from the front.
class WorkStealingPool {
 public:
  WorkStealingPool(int workers, std::uint64_t seed) : queues_(static_cast<std::size_t>(workers)), seed_(seed) {}

  void submit(int worker, Job job) {
    pending_.fetch_add(1);
    {
      std::lock_guard lock(queues_[static_cast<std::size_t>(worker)].mu);
      queues_[static_cast<std::size_t>(worker)].jobs.push_back(std::move(job));
    }
    ready_.fetch_add(1);
    if (sleepers_.load() > 0) {
      { std::lock_guard lock(sleepMu_); }
      cv_.notify_one();
    }
  }

  template <class Task>
  void run(Task&& task) {
    std::vector<std::thread> threads;
    for (int w = 0; w < static_cast<int>(queues_.size()); ++w)
      threads.emplace_back([this, w, &task] { work(w, task); });
    for (auto& t : threads) t.join();
    if (error_) std::rethrow_exception(error_);
  }

  std::uint64_t steals() const { return steals_.load(); }

 private:
  struct Queue {
    std::mutex mu;
    std::deque<Job> jobs;
  };

  bool tryPop(int w, Job& out, std::mt19937_64& rng) {
    auto n = queues_.size();
    {
      Queue& own = queues_[static_cast<std::size_t>(w)];
      std::lock_guard lock(own.mu);
      if (!own.jobs.empty()) {
        out = std::move(own.jobs.back());
        own.jobs.pop_back();
        ready_.fetch_sub(1);
        return true;
      }
    }
    std::size_t start = rng() % n;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t v = (start + k) % n;
      if (v == static_cast<std::size_t>(w)) continue;
      Queue& victim = queues_[v];
      std::lock_guard lock(victim.mu);
      if (!victim.jobs.empty()) {
        out = std::move(victim.jobs.front());
        victim.jobs.pop_front();
        ready_.fetch_sub(1);
        steals_.fetch_add(1, std::memory_order_relaxed);
        return true;
      }
    }
    return false;
  }

  void wakeAll() {
    { std::lock_guard lock(sleepMu_); }
    cv_.notify_all();
  }

  template <class Task>
  void work(int w, Task& task) {
    std::mt19937_64 rng(seed_ * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(w));
    while (!stop_.load()) {
      Job job;
      if (tryPop(w, job, rng)) {
        try {
          task(w, job);
        } catch (...) {
          std::lock_guard lock(errorMu_);
          if (!error_) error_ = std::current_exception();
          stop_.store(true);
        }
        if (pending_.fetch_sub(1) == 1 || stop_.load()) wakeAll();
        continue;
      }
      std::unique_lock lock(sleepMu_);
      sleepers_.fetch_add(1);
      cv_.wait(lock, [&] { return stop_.load() || pending_.load() == 0 || ready_.load() > 0; });
      sleepers_.fetch_sub(1);
      if (pending_.load() == 0) break;
    }
  }

  std::vector<Queue> queues_;
  std::uint64_t seed_;
  std::atomic<std::int64_t> pending_{0};
  std::atomic<std::int64_t> ready_{0};
  std::atomic<int> sleepers_{0};
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> steals_{0};
  std::mutex sleepMu_;
  std::condition_variable cv_;
  std::mutex errorMu_;
  std::exception_ptr error_;
};

void insertSourceFacts(const validate::StratifiedProgram& p, const funceval::FunctionTable& fns, FactDatabase& db) {
  for (const syntax::Clause& c : p.facts) {
    std::vector<TermId> args;
    try {
      for (TermId a : c.head.args) args.push_back(evalGround(a, fns));
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail() + "\n  in fact: " + syntax::prettyPrint(c), c.loc);
    }
    db.insert(c.head.relation, args);
  }
}

class StratumRun {
 public:
  StratumRun(const std::vector<OrderedRule>& rules, const std::vector<Symbol>& relations, FactDatabase& db,
             const funceval::FunctionTable& fns, const Options& options)
      : db_(db), fns_(fns), options_(options) {
    std::unordered_set<Symbol> inStratum(relations.begin(), relations.end());
    for (const OrderedRule& r : rules) {
      seeds_.push_back(seedPlan(r));
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        const Premise& pr = r.body[i];
        if (pr.kind == Premise::Kind::Positive && inStratum.count(pr.atom.relation))
          triggered_.push_back(triggerPlan(r, i));
      }
    }
    for (const Plan& p : triggered_) byRelation_[p.rule->body[p.trigger].atom.relation].push_back(&p);
  }

  void run(Stats& stats) {
    int workers = std::max(1, options_.workers);
    // Every seed sees the database as it stood when the stratum began. What
    // the seeds derive is inserted afterwards and then drives the pipeline.
    std::vector<std::vector<std::pair<Symbol, TermId>>> seeded(seeds_.size());
    auto seedOne = [&](const Plan* plan) {
      workItems_.fetch_add(1, std::memory_order_relaxed);
      auto& out = seeded[static_cast<std::size_t>(plan - seeds_.data())];
      Matcher m(db_, fns_);
      m.run(*plan, kNoTerm, [&](Symbol rel, TermId tuple) { out.emplace_back(rel, tuple); });
    };
    if (workers == 1) {
      for (const Plan& p : seeds_) seedOne(&p);
    } else {
      WorkStealingPool pool(workers, options_.seed);
      for (std::size_t i = 0; i < seeds_.size(); ++i) pool.submit(static_cast<int>(i % workers), Job{&seeds_[i], {}});
      pool.run([&](int, Job& job) { seedOne(job.plan); });
      stats.steals += pool.steals();
    }

    std::vector<Job> initial;
    Pending pending;
    auto collect = [&](Job j) { initial.push_back(std::move(j)); };
    for (const auto& out : seeded)
      for (auto [rel, tuple] : out) derive(rel, tuple, pending, collect);
    flush(pending, collect);

    if (workers == 1) {
      runInline(std::move(initial));
    } else {
      runPool(workers, std::move(initial), stats);
    }
    stats.workItems += workItems_.load();
    stats.derivations += derivations_.load();
  }

 private:
  using Pending = std::unordered_map<const Plan*, std::vector<TermId>>;

  void runPool(int workers, std::vector<Job> initial, Stats& stats) {
    WorkStealingPool pool(workers, options_.seed);
    for (std::size_t i = 0; i < initial.size(); ++i) pool.submit(static_cast<int>(i % workers), std::move(initial[i]));
    pool.run([&](int w, Job& job) {
      process(job, [&](Job next) { pool.submit(w, std::move(next)); });
    });
    stats.steals += pool.steals();
  }

  void runInline(std::vector<Job> stack) {
    std::reverse(stack.begin(), stack.end());
    while (!stack.empty()) {
      Job job = std::move(stack.back());
      stack.pop_back();
      process(job, [&](Job next) { stack.push_back(std::move(next)); });
    }
  }

  // Inserts a derived fact; the caller that wins the insert queues it for
  // every plan triggered by its relation.
  template <class Submit>
  void derive(Symbol rel, TermId tuple, Pending& pending, Submit& submit) {
    if (!db_.insertTuple(rel, tuple)) return;
    derivations_.fetch_add(1, std::memory_order_relaxed);
    auto it = byRelation_.find(rel);
    if (it == byRelation_.end()) return;
    for (const Plan* p : it->second) {
      auto& batch = pending[p];
      batch.push_back(tuple);
      if (batch.size() >= options_.batchSize) submit(Job{p, std::exchange(batch, {})});
    }
  }

  template <class Submit>
  void flush(Pending& pending, Submit& submit) {
    for (auto& [p, batch] : pending)
      if (!batch.empty()) submit(Job{p, std::move(batch)});
  }

  template <class Submit>
  void process(const Job& job, Submit&& submit) {
    workItems_.fetch_add(1, std::memory_order_relaxed);
    Matcher m(db_, fns_);
    Pending pending;
    auto emit = [&](Symbol rel, TermId tuple) { derive(rel, tuple, pending, submit); };
    for (TermId f : job.facts) m.run(*job.plan, f, emit);
    flush(pending, submit);
  }

  FactDatabase& db_;
  const funceval::FunctionTable& fns_;
  const Options& options_;
  std::vector<Plan> seeds_;
  std::deque<Plan> triggered_;  // stable addresses
  std::unordered_map<Symbol, std::vector<const Plan*>> byRelation_;
  std::atomic<std::uint64_t> workItems_{0};
  std::atomic<std::uint64_t> derivations_{0};
};

}  // namespace

std::vector<TermId> joinStep(const OrderedRule& rule, std::size_t trigger, TermId tuple, const FactDatabase& db,
                             const funceval::FunctionTable& fns) {
  Plan plan = triggerPlan(rule, trigger);
  const Premise& pr = rule.body[trigger];
  std::vector<TermId> out;
  if (pr.kind != Premise::Kind::Positive) return out;
  Matcher m(db, fns);
  m.run(plan, tuple, [&](Symbol, TermId head) {
    if (std::find(out.begin(), out.end(), head) == out.end()) out.push_back(head);
  });
  return out;
}

FactDatabase evaluate(const validate::StratifiedProgram& p, const funceval::FunctionTable& fns, FactDatabase edb,
                      const Options& options, Stats* stats) {
  FactDatabase db = std::move(edb);
  insertSourceFacts(p, fns, db);
  Stats total;
  for (std::size_t s = 0; s < p.strata.size(); ++s) {
    StratumRun run(p.rulesByStratum[s], p.strata[s], db, fns, options);
    run.run(total);
  }
  if (stats) *stats = total;
  return db;
}

}  // namespace fmlog::engine
