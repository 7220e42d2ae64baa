#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fmlog/cli.hpp"
#include "fmlog/types.hpp"

namespace fmlog::cli {

namespace fs = std::filesystem;

int exitCode(Stage stage) {
  switch (stage) {
    case Stage::Io: return 1;
    case Stage::Parse: return 2;
    case Stage::TypeCheck: return 3;
    case Stage::Validate: return 4;
    case Stage::Evaluate: return 5;
  }
  return 1;
}

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class StageTimer {
 public:
  explicit StageTimer(std::ostream* report) : report_(report), start_(std::chrono::steady_clock::now()) {}

  long long lap(const char* stage, const std::string& extra = "") {
    auto now = std::chrono::steady_clock::now();
    long long ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count();
    if (report_) *report_ << "stage=" << stage << " ms=" << ms << extra << "\n";
    start_ = now;
    return ms;
  }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::ostream* report_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

LoadedProgram loadProgram(const std::string& text) {
  LoadedProgram lp;
  lp.source = syntax::parse(text);
  types::checkProgram(lp.source);
  lp.stratified = validate::validateProgram(lp.source);
  return lp;
}

LoadedProgram loadProgramFile(const std::string& path) { return loadProgram(readFile(path)); }

void ingestFacts(const syntax::SourceProgram& program, const syntax::RelDecl& relation, std::istream& in,
                 const std::string& name, engine::FactDatabase& db) {
  types::FactChecker checker(program);
  const std::size_t arity = relation.argTypes.size();
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && arity > 0) continue;
    std::vector<std::string> columns;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      columns.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (arity == 0 && columns.size() == 1 && columns[0].empty()) columns.clear();
    std::string where = name + ":" + std::to_string(lineNo) + ": ";
    if (columns.size() != arity)
      throw Error(ErrorKind::ArityMismatch, where + "expected " + std::to_string(arity) + " column(s) for " +
                                                terms::symName(relation.name) + ", found " +
                                                std::to_string(columns.size()));
    syntax::Atom atom{relation.name, {}};
    for (std::size_t i = 0; i < columns.size(); ++i) {
      try {
        atom.args.push_back(syntax::parseGroundTerm(columns[i], program));
      } catch (const Error& e) {
        throw Error(ErrorKind::TermParseError, where + "column " + std::to_string(i + 1) + ": " + e.detail());
      }
    }
    try {
      checker.check(atom);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.detail());
    }
    db.insert(relation.name, atom.args);
  }
}

engine::FactDatabase loadFactDirs(const syntax::SourceProgram& program, const std::vector<std::string>& dirs) {
  engine::FactDatabase db;
  for (const std::string& dir : dirs) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "fact directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      const syntax::RelDecl* decl = program.findRelation(terms::sym(f.stem().string()));
      if (!decl) throw Error(ErrorKind::IoError, f.string() + ": no relation named " + f.stem().string());
      std::ifstream in(f);
      if (!in) throw Error(ErrorKind::IoError, "cannot read " + f.string());
      ingestFacts(program, *decl, in, f.string(), db);
    }
  }
  return db;
}

std::shared_ptr<smt::Backend> makeBackend(const std::string& choice) {
  if (choice == "builtin") return std::make_shared<smt::BuiltinBackend>();
  if (choice == "external" || choice.rfind("external:", 0) == 0) {
    std::string path = choice == "external" ? "" : choice.substr(9);
    auto found = smt::findExternalSolver(path);
    if (!found)
      throw Error(ErrorKind::BackendUnavailable,
                  path.empty() ? "no external solver: set FMLOG_SMT_SOLVER or put z3 on PATH"
                               : "external solver not found or not executable: " + path);
    return std::make_shared<smt::ExternalBackend>(*found);
  }
  throw Error(ErrorKind::BackendUnavailable, "unknown solver backend '" + choice + "' (use builtin or external:PATH)");
}

std::string diagnostic(const Error& e, const std::string& file) {
  std::string s = "error[" + std::string(stageName(e.stage())) + "]: ";
  if (e.location().known()) s += file + ":" + e.location().str() + ": ";
  return s + e.detail();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  StageTimer timer(cfg.timingReport ? &err : nullptr);
  try {
    std::string text = readFile(cfg.programPath);
    timer.lap("read");
    LoadedProgram lp;
    lp.source = syntax::parse(text);
    timer.lap("parse");
    types::checkProgram(lp.source);
    timer.lap("typecheck");
    validate::checkPatterns(lp.source);
    for (const syntax::Clause& c : lp.source.clauses) {
      validate::checkFunctionBinding(c);
      validate::checkRangeRestriction(c);
    }
    timer.lap("validate");
    lp.stratified = validate::stratify(lp.source);
    timer.lap("rewrite");

    std::vector<Symbol> dump;
    for (const std::string& r : cfg.dumpRelations) {
      if (r == "all") {
        for (Symbol s : engine::outputRelations(lp.source)) dump.push_back(s);
      } else if (lp.source.findRelation(terms::sym(r))) {
        dump.push_back(terms::sym(r));
      } else {
        err << "error[io]: --dump names unknown relation " << r << "\n";
        return exitCode(Stage::Io);
      }
    }

    engine::FactDatabase edb = loadFactDirs(lp.source, cfg.factDirs);
    timer.lap("ingest");

    smt::Solver solver(makeBackend(cfg.smtBackend));
    funceval::Options fopts;
    fopts.stepBudget = cfg.stepBudget;
    funceval::FunctionTable fns(lp.source, solver.services(), fopts);
    engine::Options eopts;
    eopts.workers = std::max(1, cfg.workers);
    eopts.seed = cfg.seed;
    std::size_t before = edb.totalSize();
    engine::FactDatabase db = engine::evaluate(lp.stratified, fns, std::move(edb), eopts);
    std::size_t derived = db.totalSize() - before;
    double secs = timer.seconds();
    timer.lap("evaluate", " facts=" + std::to_string(derived) + " facts_per_sec=" +
                              std::to_string(static_cast<long long>(secs > 0 ? derived / secs : 0)));

    out << db.dump(dump);
    out.flush();
    timer.lap("dump");
    return 0;
  } catch (const Error& e) {
    err << diagnostic(e, cfg.programPath) << "\n";
    return exitCode(e.stage());
  }
}

}  // namespace fmlog::cli
