#include <cctype>
#include <sstream>

#include "fmlog/syntax.hpp"

namespace fmlog::syntax {

namespace {

bool isAnon(const std::string& name) { return name.rfind(kAnonPrefix, 0) == 0; }

// Like terms::render, but anonymous variables go back to `_` so the output
// parses again.
void term(TermId t, std::string& out) {
  const TermNode& n = terms::node(t);
  if (n.kind == TermKind::Var) {
    const std::string& name = terms::symName(n.sym);
    out += isAnon(name) ? "_" : name;
    return;
  }
  if (n.ground || n.args.empty()) {
    terms::render(t, out);
    return;
  }
  std::string name = n.kind == TermKind::Tuple ? "" : terms::symName(n.sym);
  bool infix = n.kind == TermKind::Call && n.args.size() == 2 && findBuiltin(name) && !name.empty() &&
               !std::isalpha(static_cast<unsigned char>(name[0]));
  out += infix ? "" : name;
  out.push_back('(');
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) out += infix ? " " + name + " " : ", ";
    term(n.args[i], out);
  }
  out.push_back(')');
}

std::string term(TermId t) {
  std::string s;
  term(t, s);
  return s;
}

std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 4, ' '); }

void expr(const Expr& e, int depth, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Term: out += term(e.term); return;
    case Expr::Kind::Match:
      out += "match ";
      expr(*e.scrutinee, depth + 1, out);
      out += " with";
      for (const MatchBranch& b : e.branches) {
        out += "\n" + indent(depth) + "| " + term(b.pattern) + " => ";
        expr(*b.body, depth + 1, out);
      }
      out += "\n" + indent(depth) + "end";
      return;
    case Expr::Kind::Let:
      out += "let " + term(e.term) + " = ";
      expr(*e.scrutinee, depth + 1, out);
      out += " in\n" + indent(depth);
      expr(*e.body, depth, out);
      return;
    case Expr::Kind::If:
      out += "if ";
      expr(*e.scrutinee, depth + 1, out);
      out += " then ";
      expr(*e.body, depth + 1, out);
      out += " else ";
      expr(*e.elseBranch, depth + 1, out);
      return;
  }
}

std::string typeList(const std::vector<TypeExpr>& ts) {
  std::string s = "(";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ", ";
    s += render(ts[i]);
  }
  return s + ")";
}

std::string typeParams(const std::vector<std::string>& ps) {
  if (ps.empty()) return "";
  if (ps.size() == 1) return ps[0] + " ";
  std::string s = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? ", " : "") + ps[i];
  return s + ") ";
}

}  // namespace

std::string render(const TypeExpr& t) {
  switch (t.kind) {
    case TypeExpr::Kind::Base:
    case TypeExpr::Kind::Var:
    case TypeExpr::Kind::Rigid:
      return t.name;
    case TypeExpr::Kind::Tuple: {
      std::string s = "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? " * " : "") + render(t.args[i]);
      return s + ")";
    }
    case TypeExpr::Kind::Named:
      if (t.args.empty()) return t.name;
      if (t.args.size() == 1) {
        std::string inner = render(t.args[0]);
        return inner + " " + t.name;
      }
      return typeList(t.args) + " " + t.name;
  }
  return "?";
}

std::string prettyPrint(const Atom& a) {
  std::string s = terms::symName(a.relation) + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ", ";
    s += term(a.args[i]);
  }
  return s + ")";
}

std::string prettyPrint(const Premise& p) {
  switch (p.kind) {
    case Premise::Kind::Positive: return prettyPrint(p.atom);
    case Premise::Kind::Negated: return "!" + prettyPrint(p.atom);
    case Premise::Kind::Unify: return term(p.lhs) + " = " + term(p.rhs);
  }
  return "";
}

std::string prettyPrint(const Clause& c) {
  std::string s = prettyPrint(c.head);
  for (std::size_t i = 0; i < c.body.size(); ++i) s += (i ? ",\n    " : " :-\n    ") + prettyPrint(c.body[i]);
  return s + ".";
}

std::string prettyPrint(const Expr& e) {
  std::string s;
  expr(e, 1, s);
  return s;
}

std::string prettyPrint(const SourceProgram& p) {
  std::ostringstream out;
  for (const TypeAlias& a : p.aliases)
    out << "define type " << typeParams(a.typeParams) << a.name << " = " << render(a.target) << ".\n";
  for (const AdtDef& adt : p.typeDefs) {
    out << "define type " << typeParams(adt.typeParams) << adt.name << " =";
    for (const CtorDef& c : adt.ctors) {
      out << "\n  | " << terms::symName(c.name);
      if (!c.argTypes.empty()) out << typeList(c.argTypes);
    }
    out << ".\n";
  }
  for (const FuncDecl& f : p.funcDecls)
    out << "declare fun " << terms::symName(f.name) << typeList(f.params) << " : " << render(f.ret) << ".\n";
  for (const FuncDef& f : p.funcDefs) {
    out << "fun " << terms::symName(f.name) << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) out << (i ? ", " : "") << terms::symName(f.params[i]);
    out << ") =\n    " << prettyPrint(*f.body) << ".\n";
  }
  for (const RelDecl& r : p.relDecls)
    out << "declare " << (r.kind == RelKind::Input ? "input " : "output ") << terms::symName(r.name)
        << typeList(r.argTypes) << ".\n";
  for (const Clause& c : p.clauses) out << prettyPrint(c) << "\n";
  return out.str();
}

}  // namespace fmlog::syntax
