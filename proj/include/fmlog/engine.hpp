#pragma once

// Bottom-up evaluation. Facts are stored as interned tuple terms so that
// duplicate detection is a single id comparison.

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fmlog/funceval.hpp"
#include "fmlog/validate.hpp"

namespace fmlog::engine {

/// Bit i set means argument position i is bound.
using PositionMask = std::uint64_t;

class FactDatabase {
 public:
  FactDatabase();
  ~FactDatabase();
  FactDatabase(FactDatabase&&) noexcept;
  FactDatabase& operator=(FactDatabase&&) noexcept;

  /// Inserts the atom `relation(args...)`; `tuple` is the interned tuple of
  /// its arguments. Returns true for exactly one of several racing callers.
  bool insertTuple(Symbol relation, TermId tuple);
  bool insert(Symbol relation, const std::vector<TermId>& args);
  bool contains(Symbol relation, TermId tuple) const;

  /// Snapshot of a relation in insertion order.
  std::vector<TermId> facts(Symbol relation) const;
  /// Facts whose arguments at the positions in `mask` equal the elements of
  /// `key` (a tuple term, in position order). Builds the index on first use.
  std::vector<TermId> lookup(Symbol relation, PositionMask mask, TermId key) const;

  std::size_t size(Symbol relation) const;
  std::size_t totalSize() const;
  std::vector<Symbol> relations() const;
  std::size_t indexCount(Symbol relation) const;

  /// Sorted, newline-terminated lines `rel(arg, ...)`.
  std::string dump(Symbol relation) const;
  std::string dump(const std::vector<Symbol>& relations) const;

 private:
  struct Relation;
  Relation* find(Symbol relation) const;
  Relation& get(Symbol relation);

  mutable std::shared_mutex mu_;
  std::unordered_map<Symbol, std::unique_ptr<Relation>> relations_;
};

/// Text of one atom as it appears in dumps.
std::string renderAtom(Symbol relation, TermId tuple);

/// The output relations of a program, sorted by name.
std::vector<Symbol> outputRelations(const syntax::SourceProgram& p);

struct Options {
  int workers = 1;
  /// Derived facts handed to one work item.
  std::size_t batchSize = 1;
  /// Drives victim selection during work stealing.
  std::uint64_t seed = 0;
};

struct Stats {
  std::uint64_t workItems = 0;
  std::uint64_t derivations = 0;
  std::uint64_t steals = 0;
};

/// Reduces every call inside `t` (which must have no variables).
TermId evalGround(TermId t, const funceval::FunctionTable& fns);

/// Heads derived by `rule` when premise `trigger` is matched against the
/// single fact `tuple` and every other premise against `db`.
std::vector<TermId> joinStep(const validate::OrderedRule& rule, std::size_t trigger, TermId tuple,
                             const FactDatabase& db, const funceval::FunctionTable& fns);

/// Least fixpoint, stratum by stratum, with parallel pipelined semi-naive
/// evaluation. In-source facts are added to `edb` first.
FactDatabase evaluate(const validate::StratifiedProgram& p, const funceval::FunctionTable& fns, FactDatabase edb,
                      const Options& options = {}, Stats* stats = nullptr);

/// Sequential naive fixpoint with full scans. Test oracle only.
FactDatabase naiveEvaluate(const validate::StratifiedProgram& p, const funceval::FunctionTable& fns,
                           FactDatabase edb);

}  // namespace fmlog::engine
