#pragma once

// Satisfiability of bool_exp formulas in 32-bit two's-complement bitvector
// logic. Two backends: an in-process bit-blaster and an external SMT-LIB2
// solver process.

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "fmlog/funceval.hpp"
#include "fmlog/terms.hpp"

namespace fmlog::smt {

enum class SatResult { Sat, Unsat };

/// Complete QF_BV script for `formula`. Declarations are sorted by name.
std::string toSmtLib(TermId formula);

/// Bit-blasts `formula` and decides it with the in-process CDCL solver.
/// Throws ResourceLimit once `conflictBudget` conflicts have been spent.
SatResult builtinCheckSat(TermId formula, std::uint64_t conflictBudget = 2'000'000);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual SatResult checkSat(TermId formula) = 0;
  virtual std::string name() const = 0;
  virtual bool supportsInterpolants() const { return false; }
  /// Both bundled backends throw UnsupportedOperation.
  virtual std::optional<TermId> interpolant(TermId a, TermId b);
};

class BuiltinBackend final : public Backend {
 public:
  explicit BuiltinBackend(std::uint64_t conflictBudget = 2'000'000) : budget_(conflictBudget) {}
  SatResult checkSat(TermId formula) override { return builtinCheckSat(formula, budget_); }
  std::string name() const override { return "builtin"; }

 private:
  std::uint64_t budget_;
};

/// Runs `path` once per query, writing the script to its stdin. When the
/// executable is named z3, `-in` is passed so it reads stdin.
class ExternalBackend final : public Backend {
 public:
  explicit ExternalBackend(std::string path);
  SatResult checkSat(TermId formula) override;
  std::string name() const override { return "external:" + path_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<std::string> extraArgs_;
};

/// Locates an external solver: the explicit path if non-empty, else
/// FMLOG_SMT_SOLVER, else `z3` on PATH. Returns nullopt if none is runnable.
std::optional<std::string> findExternalSolver(const std::string& explicitPath = "");

/// Concurrent map from formula to verdict.
class SatCache {
 public:
  std::optional<SatResult> lookup(TermId formula) const;
  void store(TermId formula, SatResult r);
  std::size_t size() const;

 private:
  static constexpr std::size_t kShards = 16;
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<TermId, SatResult> map;
  };
  Shard shards_[kShards];
};

/// Backend plus optional cache; what `is_sat` calls.
class Solver {
 public:
  explicit Solver(std::shared_ptr<Backend> backend, bool useCache = true);

  bool isSat(TermId formula);
  TermId interpolant(TermId a, TermId b);
  funceval::Services services();

  Backend& backend() { return *backend_; }
  std::uint64_t queries() const { return queries_.load(); }
  std::uint64_t cacheHits() const { return hits_.load(); }

 private:
  std::shared_ptr<Backend> backend_;
  bool useCache_;
  SatCache cache_;
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::uint64_t> hits_{0};
};

/// Reference semantics of the bv32 operators, shared by tests and the
/// constant-folding oracle. Division follows SMT-LIB bvsdiv/bvsrem.
std::int32_t bvSdiv(std::int32_t a, std::int32_t b);
std::int32_t bvSrem(std::int32_t a, std::int32_t b);

}  // namespace fmlog::smt
