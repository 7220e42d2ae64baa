#include <cctype>
#include <cstring>
#include <unordered_map>

#include "fmlog/terms.hpp"

namespace fmlog {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 29);
}

std::uint64_t hashNode(const TermNode& n) {
  std::uint64_t h = mix(static_cast<std::uint64_t>(n.kind) + 1, n.sym);
  h = mix(h, static_cast<std::uint32_t>(n.value));
  for (TermId a : n.args) h = mix(h, a);
  return h;
}

bool sameNode(const TermNode& a, const TermNode& b) {
  return a.kind == b.kind && a.sym == b.sym && a.value == b.value && a.args == b.args;
}

}  // namespace

// ---------------------------------------------------------------------------
// SymbolTable

struct SymbolTable::Shard {
  std::mutex mu;
  std::unordered_map<std::string, Symbol> map;
};

SymbolTable::SymbolTable() : shards_(new Shard[kShards]) {}
SymbolTable::~SymbolTable() = default;

Symbol SymbolTable::intern(std::string_view text) {
  std::size_t h = std::hash<std::string_view>{}(text);
  Shard& shard = shards_[h % kShards];
  std::lock_guard lock(shard.mu);
  auto it = shard.map.find(std::string(text));
  if (it != shard.map.end()) return it->second;
  Symbol id = next_.fetch_add(1, std::memory_order_acq_rel);
  names_.slot(id) = std::string(text);
  shard.map.emplace(std::string(text), id);
  return id;
}

// ---------------------------------------------------------------------------
// TermStore

// Open-addressing table of term ids; the hash lives in the node itself.
struct TermStore::Shard {
  std::mutex mu;
  std::vector<TermId> slots = std::vector<TermId>(64, kNoTerm);
  std::size_t used = 0;
};

TermStore::TermStore() : shards_(new Shard[kShards]) {}
TermStore::~TermStore() = default;

TermStore& TermStore::global() {
  static TermStore* instance = new TermStore();
  return *instance;
}

TermId TermStore::intern(TermNode&& candidate) {
  candidate.hash = hashNode(candidate);
  Shard& shard = shards_[(candidate.hash >> 58) % kShards];
  std::lock_guard lock(shard.mu);

  std::size_t mask = shard.slots.size() - 1;
  std::size_t i = candidate.hash & mask;
  while (shard.slots[i] != kNoTerm) {
    const TermNode& existing = nodes_[shard.slots[i]];
    if (existing.hash == candidate.hash && sameNode(existing, candidate)) return shard.slots[i];
    i = (i + 1) & mask;
  }

  TermId id = next_.fetch_add(1, std::memory_order_acq_rel);
  nodes_.slot(id) = std::move(candidate);
  shard.slots[i] = id;
  ++shard.used;

  if (shard.used * 2 > shard.slots.size()) {
    std::vector<TermId> bigger(shard.slots.size() * 2, kNoTerm);
    std::size_t bmask = bigger.size() - 1;
    for (TermId t : shard.slots) {
      if (t == kNoTerm) continue;
      std::size_t j = nodes_[t].hash & bmask;
      while (bigger[j] != kNoTerm) j = (j + 1) & bmask;
      bigger[j] = t;
    }
    shard.slots = std::move(bigger);
  }
  return id;
}

TermId TermStore::var(Symbol name) {
  TermNode n;
  n.kind = TermKind::Var;
  n.sym = name;
  n.ground = false;
  return intern(std::move(n));
}

TermId TermStore::integer(std::int32_t value) {
  TermNode n;
  n.kind = TermKind::Int;
  n.value = value;
  return intern(std::move(n));
}

TermId TermStore::string(std::string_view text) {
  TermNode n;
  n.kind = TermKind::Str;
  n.sym = symbols_.intern(text);
  return intern(std::move(n));
}

namespace {
void fillFlags(const TermStore& store, TermNode& n) {
  for (TermId a : n.args) {
    const TermNode& c = store.node(a);
    n.ground = n.ground && c.ground;
    n.hasCall = n.hasCall || c.hasCall;
  }
}
}  // namespace

TermId TermStore::ctor(Symbol name, std::span<const TermId> args) {
  TermNode n;
  n.kind = TermKind::Ctor;
  n.sym = name;
  n.args.assign(args.begin(), args.end());
  fillFlags(*this, n);
  return intern(std::move(n));
}

TermId TermStore::tuple(std::span<const TermId> args) {
  TermNode n;
  n.kind = TermKind::Tuple;
  n.args.assign(args.begin(), args.end());
  fillFlags(*this, n);
  return intern(std::move(n));
}

TermId TermStore::call(Symbol fn, std::span<const TermId> args) {
  TermNode n;
  n.kind = TermKind::Call;
  n.sym = fn;
  n.args.assign(args.begin(), args.end());
  fillFlags(*this, n);
  n.ground = false;
  n.hasCall = true;
  return intern(std::move(n));
}

TermId TermStore::withArgs(TermId t, std::span<const TermId> args) {
  const TermNode& n = node(t);
  switch (n.kind) {
    case TermKind::Ctor: return ctor(n.sym, args);
    case TermKind::Tuple: return tuple(args);
    case TermKind::Call: return call(n.sym, args);
    default: return t;
  }
}

// ---------------------------------------------------------------------------
// helpers

namespace terms {

TermId var(std::string_view name) { return store().var(sym(name)); }
TermId integer(std::int32_t v) { return store().integer(v); }
TermId str(std::string_view s) { return store().string(s); }

TermId ctor(std::string_view name, std::initializer_list<TermId> args) {
  return store().ctor(sym(name), std::span<const TermId>(args.begin(), args.size()));
}
TermId tuple(std::initializer_list<TermId> args) {
  return store().tuple(std::span<const TermId>(args.begin(), args.size()));
}
TermId call(std::string_view fn, std::initializer_list<TermId> args) {
  return store().call(sym(fn), std::span<const TermId>(args.begin(), args.size()));
}

void collectVars(TermId t, std::vector<Symbol>& out) {
  const TermNode& n = node(t);
  if (n.ground) return;
  if (n.kind == TermKind::Var) {
    for (Symbol s : out)
      if (s == n.sym) return;
    out.push_back(n.sym);
    return;
  }
  for (TermId a : n.args) collectVars(a, out);
}

void collectCallVars(TermId t, std::vector<Symbol>& out) {
  const TermNode& n = node(t);
  if (!n.hasCall) return;
  if (n.kind == TermKind::Call) {
    for (TermId a : n.args) collectVars(a, out);
    return;
  }
  for (TermId a : n.args) collectCallVars(a, out);
}

void collectNonCallVars(TermId t, std::vector<Symbol>& out) {
  const TermNode& n = node(t);
  if (n.ground || n.kind == TermKind::Call) return;
  if (n.kind == TermKind::Var) {
    for (Symbol s : out)
      if (s == n.sym) return;
    out.push_back(n.sym);
    return;
  }
  for (TermId a : n.args) collectNonCallVars(a, out);
}

std::string quoteString(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {
bool isOperator(const std::string& name) {
  return !name.empty() && !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
}
}  // namespace

void render(TermId t, std::string& out) {
  const TermNode& n = node(t);
  switch (n.kind) {
    case TermKind::Var: out += symName(n.sym); return;
    case TermKind::Int: out += std::to_string(n.value); return;
    case TermKind::Str: out += quoteString(symName(n.sym)); return;
    case TermKind::Tuple:
      out.push_back('(');
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        render(n.args[i], out);
      }
      out.push_back(')');
      return;
    case TermKind::Ctor:
    case TermKind::Call: {
      const std::string& name = symName(n.sym);
      if (n.kind == TermKind::Call && isOperator(name) && n.args.size() == 2) {
        out.push_back('(');
        render(n.args[0], out);
        out += " " + name + " ";
        render(n.args[1], out);
        out.push_back(')');
        return;
      }
      out += name;
      if (n.args.empty() && n.kind == TermKind::Ctor) return;
      out.push_back('(');
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        render(n.args[i], out);
      }
      out.push_back(')');
      return;
    }
  }
}

std::string render(TermId t) {
  std::string out;
  render(t, out);
  return out;
}

}  // namespace terms
}  // namespace fmlog
