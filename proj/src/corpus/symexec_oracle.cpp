#include <deque>

#include "fmlog/corpus.hpp"
#include "fmlog/error.hpp"

namespace fmlog::corpus {

namespace {



const TermNode& expectCtor(TermId t, const char* what) {
  const TermNode& n = terms::node(t);
  if (n.kind != TermKind::Ctor) throw Error(ErrorKind::IoError, std::string("expected a ") + what + " term");
  return n;
}

int intOf(TermId t) {
  const TermNode& n = terms::node(t);
  if (n.kind != TermKind::Int) throw Error(ErrorKind::IoError, "expected an integer term");
  return n.value;
}

std::string strOf(TermId t) {
  const TermNode& n = terms::node(t);
  if (n.kind != TermKind::Str) throw Error(ErrorKind::IoError, "expected a string term");
  return terms::symName(n.sym);
}

// Later mcons cells are shadowed by earlier ones, as with the get builtin.
std::map<std::string, TermId> flattenStore(TermId m) {
  std::map<std::string, TermId> out;
  while (true) {
    const TermNode& n = expectCtor(m, "map");
    if (terms::symName(n.sym) == "mnil") return out;
    out.emplace(strOf(n.args[0]), n.args[1]);
    m = n.args[2];
  }
}

TermId ctor(const char* name, std::vector<TermId> args = {}) {
  return terms::store().ctor(terms::sym(name), args);
}

TermId constraintFor(const std::string& cond, TermId a, TermId b) {
  if (cond == "cond_eq") return ctor("bv32_eq", {a, b});
  if (cond == "cond_ne") return ctor("not", {ctor("bv32_eq", {a, b})});
  if (cond == "cond_lt") return ctor("bv32_slt", {a, b});
  if (cond == "cond_le") return ctor("not", {ctor("bv32_sgt", {a, b})});
  if (cond == "cond_gt") return ctor("bv32_sgt", {a, b});
  if (cond == "cond_ge") return ctor("not", {ctor("bv32_slt", {a, b})});
  throw Error(ErrorKind::IoError, "unknown condition " + cond);
}

std::string negated(const std::string& cond) {
  static const std::map<std::string, std::string> table = {{"cond_eq", "cond_ne"}, {"cond_ne", "cond_eq"},
                                                            {"cond_lt", "cond_ge"}, {"cond_le", "cond_gt"},
                                                            {"cond_gt", "cond_le"}, {"cond_ge", "cond_lt"}};
  auto it = table.find(cond);
  if (it == table.end()) throw Error(ErrorKind::IoError, "unknown condition " + cond);
  return it->second;
}

TermId binop(const std::string& op, TermId a, TermId b) {
  if (op == "op_add") return ctor("bv32_add", {a, b});
  if (op == "op_sub") return ctor("bv32_sub", {a, b});
  if (op == "op_mul") return ctor("bv32_mul", {a, b});
  if (op == "op_div") return ctor("bv32_div", {a, b});
  if (op == "op_rem") return ctor("bv32_rem", {a, b});
  throw Error(ErrorKind::IoError, "unknown operator " + op);
}

TermId readReg(const SymState& s, const std::string& reg) {
  auto it = s.store.find(reg);
  if (it == s.store.end())
    throw Error(ErrorKind::MatchFailure, "register " + reg + " read before it was written at node " +
                                             std::to_string(s.node));
  return it->second;
}

}  // namespace

RegisterProgram registerProgramFromFacts(const engine::FactDatabase& db) {
  RegisterProgram rp;
  for (TermId f : db.facts(terms::sym("stmt"))) {
    const auto& args = terms::node(f).args;
    rp.stmts[intOf(args[0])] = args[1];
  }
  for (TermId f : db.facts(terms::sym("fall_thru_succ"))) {
    const auto& args = terms::node(f).args;
    if (!rp.fallThru.emplace(intOf(args[0]), intOf(args[1])).second)
      throw Error(ErrorKind::IoError, "node " + std::to_string(intOf(args[0])) + " has two fall-through successors");
  }
  auto starts = db.facts(terms::sym("start"));
  auto fuels = db.facts(terms::sym("init_fuel"));
  if (starts.size() != 1 || fuels.size() != 1)
    throw Error(ErrorKind::IoError, "a register program needs exactly one start and one init_fuel fact");
  const auto& start = terms::node(starts[0]).args;
  rp.startNode = intOf(start[0]);
  rp.startStore = flattenStore(start[1]);
  rp.fuel = intOf(terms::node(fuels[0]).args[0]);
  return rp;
}

SymState decodeState(TermId factTuple) {
  const auto& fact = terms::node(factTuple).args;
  const auto& state = terms::node(fact[1]).args;
  SymState s;
  s.node = intOf(fact[0]);
  s.store = flattenStore(state[0]);
  s.pathCondition = state[1];
  s.counter = intOf(state[2]);
  s.fuel = intOf(state[3]);
  return s;
}

OracleResult symexecOracle(const RegisterProgram& rp, const std::function<bool(TermId)>& isSat) {
  OracleResult result;
  std::set<SymState> stepped;
  std::deque<SymState> work;

  SymState init;
  init.node = rp.startNode;
  init.store = rp.startStore;
  init.pathCondition = ctor("true");
  init.fuel = rp.fuel;
  work.push_back(init);

  auto fallThru = [&](int node) -> const int* {
    auto it = rp.fallThru.find(node);
    return it == rp.fallThru.end() ? nullptr : &it->second;
  };

  while (!work.empty()) {
    SymState s = std::move(work.front());
    work.pop_front();
    if (!stepped.insert(s).second) continue;
    if (s.fuel <= 0) continue;
    --s.fuel;
    if (!result.reach.insert(s).second) continue;
    ++result.reachPerNode[s.node];

    auto it = rp.stmts.find(s.node);
    if (it == rp.stmts.end()) continue;
    const TermNode& inst = expectCtor(it->second, "inst");
    const std::string kind = terms::symName(inst.sym);
    const int* next = fallThru(s.node);

    if (kind == "inst_fail") {
      result.failedAsserts.insert(s);
      continue;
    }
    if (kind == "inst_jmp") {
      std::string cond = terms::symName(expectCtor(inst.args[0], "cond").sym);
      TermId a = readReg(s, strOf(inst.args[1]));
      TermId b = readReg(s, strOf(inst.args[2]));
      SymState taken = s;
      taken.node = intOf(inst.args[3]);
      taken.pathCondition = ctor("and", {constraintFor(cond, a, b), s.pathCondition});
      if (isSat(taken.pathCondition)) work.push_back(std::move(taken));
      if (next) {
        SymState fall = s;
        fall.node = *next;
        fall.pathCondition = ctor("and", {constraintFor(negated(cond), a, b), s.pathCondition});
        if (isSat(fall.pathCondition)) work.push_back(std::move(fall));
      }
      continue;
    }
    if (!next) continue;
    SymState succ = s;
    succ.node = *next;
    if (kind == "inst_mov") {
      succ.store[strOf(inst.args[0])] = readReg(s, strOf(inst.args[1]));
    } else if (kind == "inst_const") {
      succ.store[strOf(inst.args[0])] = ctor("bv32_const", {inst.args[1]});
    } else if (kind == "inst_havoc") {
      std::string name = "sym_" + std::to_string(s.node) + "_" + std::to_string(s.counter);
      succ.store[strOf(inst.args[0])] = ctor("bv32_sym", {terms::store().string(name)});
      ++succ.counter;
    } else if (kind == "inst_neg") {
      succ.store[strOf(inst.args[0])] = ctor("bv32_neg", {readReg(s, strOf(inst.args[1]))});
    } else if (kind == "inst_binop") {
      std::string op = terms::symName(expectCtor(inst.args[0], "binop").sym);
      succ.store[strOf(inst.args[1])] = binop(op, readReg(s, strOf(inst.args[2])), readReg(s, strOf(inst.args[3])));
    } else {
      throw Error(ErrorKind::IoError, "unknown instruction " + kind);
    }
    work.push_back(std::move(succ));
  }
  return result;
}

}  // namespace fmlog::corpus
