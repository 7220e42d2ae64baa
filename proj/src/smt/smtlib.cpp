#include <cstdio>
#include <set>
#include <sstream>

#include "fmlog/smt.hpp"

namespace fmlog::smt {

namespace {

bool needsQuoting(const std::string& name) {
  static const std::set<std::string> reserved = {"true", "false", "not", "and", "or", "xor", "ite", "let",
                                                 "distinct", "assert", "par", "forall", "exists", "as", "_"};
  if (name.empty() || reserved.count(name) || name.rfind("bv", 0) == 0) return true;
  if (!std::isalpha(static_cast<unsigned char>(name[0]))) return true;
  for (char ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '.') return true;
  return false;
}

std::string smtName(const std::string& name) {
  if (!needsQuoting(name)) return name;
  if (name.find_first_of("|\\") != std::string::npos)
    throw Error(ErrorKind::TranslationError, "symbol name cannot be written in SMT-LIB: " + terms::quoteString(name));
  // Quoted and plain spellings denote the same symbol, so a clash with a
  // reserved word is avoided by a prefix that no plain name can carry.
  return "|!" + name + "|";
}

class Printer {
 public:
  std::set<std::string> symbols;

  void formula(TermId t, std::ostream& os) {
    const TermNode& n = terms::node(t);
    const std::string& c = ctorName(t, n);
    if (n.args.empty() && (c == "true" || c == "false")) {
      os << c;
      return;
    }
    const char* op = nullptr;
    bool vectorArgs = true;
    if (c == "not" && n.args.size() == 1) {
      op = "not";
      vectorArgs = false;
    } else if ((c == "and" || c == "or") && n.args.size() == 2) {
      op = c == "and" ? "and" : "or";
      vectorArgs = false;
    } else if (c == "bv32_eq" && n.args.size() == 2) {
      op = "=";
    } else if (c == "bv32_slt" && n.args.size() == 2) {
      op = "bvslt";
    } else if (c == "bv32_sgt" && n.args.size() == 2) {
      op = "bvsgt";
    } else {
      throw Error(ErrorKind::TranslationError, "not a bool_exp: " + terms::render(t));
    }
    os << '(' << op;
    for (TermId a : n.args) {
      os << ' ';
      if (vectorArgs) {
        vec(a, os);
      } else {
        formula(a, os);
      }
    }
    os << ')';
  }

  void vec(TermId t, std::ostream& os) {
    const TermNode& n = terms::node(t);
    const std::string& c = ctorName(t, n);
    if (c == "bv32_const" && n.args.size() == 1 && terms::node(n.args[0]).kind == TermKind::Int) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "#x%08x", static_cast<std::uint32_t>(terms::node(n.args[0]).value));
      os << buf;
      return;
    }
    if (c == "bv32_sym" && n.args.size() == 1 && terms::node(n.args[0]).kind == TermKind::Str) {
      std::string name = smtName(terms::symName(terms::node(n.args[0]).sym));
      symbols.insert(name);
      os << name;
      return;
    }
    static const std::pair<const char*, const char*> ops[] = {
        {"bv32_neg", "bvneg"}, {"bv32_add", "bvadd"}, {"bv32_sub", "bvsub"}, {"bv32_mul", "bvmul"},
        {"bv32_div", "bvsdiv"}, {"bv32_rem", "bvsrem"}};
    for (const auto& [ctor, op] : ops) {
      if (c != ctor || n.args.size() != (c == "bv32_neg" ? 1u : 2u)) continue;
      os << '(' << op;
      for (TermId a : n.args) {
        os << ' ';
        vec(a, os);
      }
      os << ')';
      return;
    }
    throw Error(ErrorKind::TranslationError, "not a bv32_exp: " + terms::render(t));
  }

 private:
  static const std::string& ctorName(TermId t, const TermNode& n) {
    if (n.kind != TermKind::Ctor || !n.ground)
      throw Error(ErrorKind::TranslationError, "not a ground formula: " + terms::render(t));
    return terms::symName(n.sym);
  }
};

}  // namespace

std::string toSmtLib(TermId formula) {
  Printer p;
  std::ostringstream body;
  p.formula(formula, body);
  std::ostringstream os;
  os << "(set-logic QF_BV)\n";
  for (const std::string& s : p.symbols) os << "(declare-const " << s << " (_ BitVec 32))\n";
  os << "(assert " << body.str() << ")\n(check-sat)\n";
  return os.str();
}

}  // namespace fmlog::smt
