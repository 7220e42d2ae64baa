#include <algorithm>
#include <mutex>

#include "fmlog/engine.hpp"

namespace fmlog::engine {

struct FactDatabase::Relation {
  mutable std::shared_mutex mu;
  std::unordered_set<TermId> set;
  std::vector<TermId> facts;
  // Bound-position mask -> key tuple -> matching facts.
  mutable std::unordered_map<PositionMask, std::unordered_map<TermId, std::vector<TermId>>> indexes;
};

namespace {

TermId keyOf(TermId tuple, PositionMask mask) {
  const TermNode& n = terms::node(tuple);
  std::vector<TermId> parts;
  for (std::size_t i = 0; i < n.args.size(); ++i)
    if (mask >> i & 1u) parts.push_back(n.args[i]);
  return terms::store().tuple(parts);
}

}  // namespace

FactDatabase::FactDatabase() = default;
FactDatabase::~FactDatabase() = default;
FactDatabase::FactDatabase(FactDatabase&& other) noexcept : relations_(std::move(other.relations_)) {}
FactDatabase& FactDatabase::operator=(FactDatabase&& other) noexcept {
  relations_ = std::move(other.relations_);
  return *this;
}

FactDatabase::Relation* FactDatabase::find(Symbol relation) const {
  std::shared_lock lock(mu_);
  auto it = relations_.find(relation);
  return it == relations_.end() ? nullptr : it->second.get();
}

FactDatabase::Relation& FactDatabase::get(Symbol relation) {
  if (Relation* r = find(relation)) return *r;
  std::unique_lock lock(mu_);
  auto& slot = relations_[relation];
  if (!slot) slot = std::make_unique<Relation>();
  return *slot;
}

bool FactDatabase::insertTuple(Symbol relation, TermId tuple) {
  Relation& r = get(relation);
  std::unique_lock lock(r.mu);
  if (!r.set.insert(tuple).second) return false;
  r.facts.push_back(tuple);
  for (auto& [mask, index] : r.indexes) index[keyOf(tuple, mask)].push_back(tuple);
  return true;
}

bool FactDatabase::insert(Symbol relation, const std::vector<TermId>& args) {
  return insertTuple(relation, terms::store().tuple(args));
}

bool FactDatabase::contains(Symbol relation, TermId tuple) const {
  Relation* r = find(relation);
  if (!r) return false;
  std::shared_lock lock(r->mu);
  return r->set.count(tuple) > 0;
}

std::vector<TermId> FactDatabase::facts(Symbol relation) const {
  Relation* r = find(relation);
  if (!r) return {};
  std::shared_lock lock(r->mu);
  return r->facts;
}

std::vector<TermId> FactDatabase::lookup(Symbol relation, PositionMask mask, TermId key) const {
  Relation* r = find(relation);
  if (!r) return {};
  if (mask == 0) return facts(relation);
  {
    std::shared_lock lock(r->mu);
    auto idx = r->indexes.find(mask);
    if (idx != r->indexes.end()) {
      auto hit = idx->second.find(key);
      return hit == idx->second.end() ? std::vector<TermId>{} : hit->second;
    }
  }
  std::unique_lock lock(r->mu);
  auto [idx, fresh] = r->indexes.try_emplace(mask);
  if (fresh)
    for (TermId t : r->facts) idx->second[keyOf(t, mask)].push_back(t);
  auto hit = idx->second.find(key);
  return hit == idx->second.end() ? std::vector<TermId>{} : hit->second;
}

std::size_t FactDatabase::size(Symbol relation) const {
  Relation* r = find(relation);
  if (!r) return 0;
  std::shared_lock lock(r->mu);
  return r->facts.size();
}

std::size_t FactDatabase::totalSize() const {
  std::size_t n = 0;
  for (Symbol s : relations()) n += size(s);
  return n;
}

std::vector<Symbol> FactDatabase::relations() const {
  std::shared_lock lock(mu_);
  std::vector<Symbol> out;
  for (const auto& [s, r] : relations_) out.push_back(s);
  std::sort(out.begin(), out.end(),
            [](Symbol a, Symbol b) { return terms::symName(a) < terms::symName(b); });
  return out;
}

std::size_t FactDatabase::indexCount(Symbol relation) const {
  Relation* r = find(relation);
  if (!r) return 0;
  std::shared_lock lock(r->mu);
  return r->indexes.size();
}

std::string renderAtom(Symbol relation, TermId tuple) {
  std::string s = terms::symName(relation);
  s += '(';
  const TermNode& n = terms::node(tuple);
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) s += ", ";
    terms::render(n.args[i], s);
  }
  s += ')';
  return s;
}

std::string FactDatabase::dump(Symbol relation) const {
  std::vector<std::string> lines;
  for (TermId t : facts(relation)) lines.push_back(renderAtom(relation, t));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string FactDatabase::dump(const std::vector<Symbol>& relations) const {
  std::string out;
  for (Symbol r : relations) out += dump(r);
  return out;
}

std::vector<Symbol> outputRelations(const syntax::SourceProgram& p) {
  std::vector<Symbol> out;
  for (const syntax::RelDecl& d : p.relDecls)
    if (d.kind == syntax::RelKind::Output) out.push_back(d.name);
  std::sort(out.begin(), out.end(), [](Symbol a, Symbol b) { return terms::symName(a) < terms::symName(b); });
  return out;
}

}  // namespace fmlog::engine
