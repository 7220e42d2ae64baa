#pragma once

// Hash-consed terms. Every term is interned in one process-wide store and
// addressed by a 32-bit id, so structural equality is id equality.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fmlog {

using Symbol = std::uint32_t;
using TermId = std::uint32_t;

inline constexpr TermId kNoTerm = UINT32_MAX;

namespace detail {

// Append-only array with lock-free indexed reads. Writers must serialize
// with respect to each index they fill; chunks are published with release
// semantics so a reader that learned an index through any synchronizing
// channel sees the fully built element.
template <class T, unsigned ChunkBits = 12, std::size_t MaxChunks = (1u << 18)>
class ChunkedArray {
 public:
  static constexpr std::size_t kChunkSize = std::size_t{1} << ChunkBits;

  ChunkedArray() : chunks_(new std::atomic<T*>[MaxChunks]) {
    for (std::size_t i = 0; i < MaxChunks; ++i) chunks_[i].store(nullptr, std::memory_order_relaxed);
  }
  ~ChunkedArray() {
    for (std::size_t i = 0; i < MaxChunks; ++i) delete[] chunks_[i].load(std::memory_order_relaxed);
  }
  ChunkedArray(const ChunkedArray&) = delete;
  ChunkedArray& operator=(const ChunkedArray&) = delete;

  T& slot(std::size_t i) {
    std::size_t c = i >> ChunkBits;
    if (c >= MaxChunks) throw std::length_error("term store exhausted");
    T* chunk = chunks_[c].load(std::memory_order_acquire);
    if (chunk == nullptr) {
      T* fresh = new T[kChunkSize]();
      if (chunks_[c].compare_exchange_strong(chunk, fresh, std::memory_order_acq_rel)) {
        chunk = fresh;
      } else {
        delete[] fresh;
      }
    }
    return chunk[i & (kChunkSize - 1)];
  }

  const T& operator[](std::size_t i) const {
    return chunks_[i >> ChunkBits].load(std::memory_order_acquire)[i & (kChunkSize - 1)];
  }

 private:
  std::unique_ptr<std::atomic<T*>[]> chunks_;
};

}  // namespace detail

/// Interned identifier and string-literal table.
class SymbolTable {
 public:
  SymbolTable();
  ~SymbolTable();

  Symbol intern(std::string_view text);
  const std::string& name(Symbol s) const { return names_[s]; }
  std::size_t size() const { return next_.load(std::memory_order_acquire); }

 private:
  struct Shard;
  static constexpr std::size_t kShards = 16;
  std::unique_ptr<Shard[]> shards_;
  detail::ChunkedArray<std::string> names_;
  std::atomic<std::uint32_t> next_{0};
};

enum class TermKind : std::uint8_t { Var, Int, Str, Ctor, Tuple, Call };

struct TermNode {
  TermKind kind = TermKind::Int;
  // No Var and no Call anywhere below.
  bool ground = true;
  // Some Call occurs below (or at) this node.
  bool hasCall = false;
  // Var name, constructor, function, or string-literal symbol.
  Symbol sym = 0;
  std::int32_t value = 0;
  std::vector<TermId> args;
  std::uint64_t hash = 0;
};

class TermStore {
 public:
  TermStore();
  ~TermStore();
  TermStore(const TermStore&) = delete;
  TermStore& operator=(const TermStore&) = delete;

  static TermStore& global();

  SymbolTable& symbols() { return symbols_; }
  const SymbolTable& symbols() const { return symbols_; }

  TermId var(Symbol name);
  TermId integer(std::int32_t value);
  TermId string(std::string_view text);
  TermId ctor(Symbol name, std::span<const TermId> args = {});
  TermId tuple(std::span<const TermId> args);
  TermId call(Symbol fn, std::span<const TermId> args);

  // Rebuild `t` with new children (same kind and head symbol).
  TermId withArgs(TermId t, std::span<const TermId> args);

  const TermNode& node(TermId t) const { return nodes_[t]; }
  std::size_t size() const { return next_.load(std::memory_order_acquire); }

 private:
  struct Shard;
  TermId intern(TermNode&& candidate);

  static constexpr std::size_t kShards = 64;
  SymbolTable symbols_;
  std::unique_ptr<Shard[]> shards_;
  detail::ChunkedArray<TermNode> nodes_;
  std::atomic<std::uint32_t> next_{0};
};

namespace terms {

// Convenience accessors over the global store.
inline TermStore& store() { return TermStore::global(); }
inline const TermNode& node(TermId t) { return store().node(t); }
inline Symbol sym(std::string_view name) { return store().symbols().intern(name); }
inline const std::string& symName(Symbol s) { return store().symbols().name(s); }

TermId var(std::string_view name);
TermId integer(std::int32_t v);
TermId str(std::string_view s);
TermId ctor(std::string_view name, std::initializer_list<TermId> args = {});
TermId tuple(std::initializer_list<TermId> args);
TermId call(std::string_view fn, std::initializer_list<TermId> args);

inline bool isGround(TermId t) { return node(t).ground; }
void collectVars(TermId t, std::vector<Symbol>& out);
// Variables occurring as arguments (at any depth) of a Call node.
void collectCallVars(TermId t, std::vector<Symbol>& out);
// Variables occurring outside every Call node.
void collectNonCallVars(TermId t, std::vector<Symbol>& out);

/// Canonical text: constructor name with parenthesized comma-separated
/// children, decimal integers, double-quoted strings, tuples as `(a, b)`.
std::string render(TermId t);
void render(TermId t, std::string& out);
std::string quoteString(std::string_view s);

/// Variable bindings, kept sorted by symbol. Bound terms are ground.
class Substitution {
 public:
  Substitution() = default;

  std::optional<TermId> lookup(Symbol v) const;
  bool bound(Symbol v) const { return lookup(v).has_value(); }
  void bind(Symbol v, TermId t);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<Symbol, TermId>>& entries() const { return entries_; }

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::vector<std::pair<Symbol, TermId>> entries_;
};

/// Replaces bound variables; Call nodes are rebuilt but never reduced.
TermId apply(const Substitution& s, TermId t);

/// Reduces a Call node whose arguments are ground to a ground term.
using Reducer = std::function<TermId(TermId call)>;

struct UnifyStats {
  std::size_t pairVisits = 0;
};

/// Most general extension of `s` under which `a` and `b` become equal.
/// Call subterms are reduced as soon as their arguments are bound; pairs
/// waiting on a variable are parked on that variable and resumed when it
/// is bound, so total work is linear in the number of subterm pairs.
/// Returns nullopt on a clash. Throws StuckFunction when pairs remain
/// parked with no way to make progress.
std::optional<Substitution> unify(TermId a, TermId b, const Substitution& s, const Reducer& reduce,
                                  UnifyStats* stats = nullptr);

}  // namespace terms
}  // namespace fmlog
