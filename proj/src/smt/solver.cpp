#include "fmlog/smt.hpp"

namespace fmlog::smt {

std::optional<TermId> Backend::interpolant(TermId, TermId) {
  throw Error(ErrorKind::UnsupportedOperation, "interpolant: not supported by the " + name() + " backend");
}

std::optional<SatResult> SatCache::lookup(TermId formula) const {
  const Shard& s = shards_[formula % kShards];
  std::lock_guard<std::mutex> lock(s.mu);
  auto it = s.map.find(formula);
  if (it == s.map.end()) return std::nullopt;
  return it->second;
}

void SatCache::store(TermId formula, SatResult r) {
  Shard& s = shards_[formula % kShards];
  std::lock_guard<std::mutex> lock(s.mu);
  s.map.emplace(formula, r);
}

std::size_t SatCache::size() const {
  std::size_t n = 0;
  for (const Shard& s : shards_) {
    std::lock_guard<std::mutex> lock(s.mu);
    n += s.map.size();
  }
  return n;
}

Solver::Solver(std::shared_ptr<Backend> backend, bool useCache) : backend_(std::move(backend)), useCache_(useCache) {}

bool Solver::isSat(TermId formula) {
  queries_.fetch_add(1, std::memory_order_relaxed);
  if (useCache_) {
    if (auto r = cache_.lookup(formula)) {
      hits_.fetch_add(1, std::memory_order_relaxed);
      return *r == SatResult::Sat;
    }
  }
  SatResult r = backend_->checkSat(formula);
  if (useCache_) cache_.store(formula, r);
  return r == SatResult::Sat;
}

TermId Solver::interpolant(TermId a, TermId b) {
  std::optional<TermId> r = backend_->interpolant(a, b);
  if (!r) return terms::ctor("none");
  return terms::ctor("some", {*r});
}

funceval::Services Solver::services() {
  funceval::Services s;
  s.isSat = [this](TermId f) { return isSat(f); };
  s.interpolant = [this](TermId a, TermId b) { return interpolant(a, b); };
  return s;
}

}  // namespace fmlog::smt
