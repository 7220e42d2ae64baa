#include <algorithm>
#include <fstream>

#include "fmlog/corpus.hpp"
#include "fmlog/error.hpp"

namespace fmlog::corpus {

std::vector<std::pair<int, int>> generateGraph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng)) edges.emplace_back(i, j);
  return edges;
}

std::size_t writeGraph(const std::filesystem::path& dir, int n, double p, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "e.tsv");
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "e.tsv").string());
  auto edges = generateGraph(n, p, seed);
  for (auto [a, b] : edges) out << a << '\t' << b << '\n';
  return edges.size();
}

namespace {

std::int32_t randomConstant(std::mt19937_64& rng) {
  static const std::int32_t interesting[] = {0, 1, -1, 2, 3, 7, INT32_MIN, INT32_MAX, 255, -256};
  std::uniform_int_distribution<int> pick(0, 3);
  switch (pick(rng)) {
    case 0: return interesting[rng() % std::size(interesting)];
    case 1: return static_cast<std::int32_t>(rng() % 33) - 16;
    default: return static_cast<std::int32_t>(static_cast<std::uint32_t>(rng()));
  }
}

TermId randomVector(std::mt19937_64& rng, int depth, const std::vector<std::string>& symbols) {
  if (depth <= 1 || rng() % 3 == 0) {
    if (!symbols.empty() && rng() % 2 == 0)
      return terms::ctor("bv32_sym", {terms::str(symbols[rng() % symbols.size()])});
    return terms::ctor("bv32_const", {terms::integer(randomConstant(rng))});
  }
  static const char* unary = "bv32_neg";
  static const char* binary[] = {"bv32_add", "bv32_sub", "bv32_mul", "bv32_div", "bv32_rem"};
  std::size_t k = rng() % 6;
  if (k == 5) return terms::ctor(unary, {randomVector(rng, depth - 1, symbols)});
  TermId a = randomVector(rng, depth - 1, symbols);
  TermId b = randomVector(rng, depth - 1, symbols);
  return terms::ctor(binary[k], {a, b});
}

}  // namespace

TermId randomFormula(std::mt19937_64& rng, int maxDepth, const std::vector<std::string>& symbols) {
  if (maxDepth <= 1) return terms::ctor(rng() % 2 ? "true" : "false");
  switch (rng() % 7) {
    case 0: return terms::ctor("not", {randomFormula(rng, maxDepth - 1, symbols)});
    case 1:
    case 2: {
      TermId a = randomFormula(rng, maxDepth - 1, symbols);
      TermId b = randomFormula(rng, maxDepth - 1, symbols);
      return terms::ctor(rng() % 2 ? "and" : "or", {a, b});
    }
    default: {
      static const char* cmp[] = {"bv32_eq", "bv32_slt", "bv32_sgt"};
      const char* op = cmp[rng() % 3];
      TermId a = randomVector(rng, maxDepth - 1, symbols);
      TermId b = randomVector(rng, maxDepth - 1, symbols);
      return terms::ctor(op, {a, b});
    }
  }
}


std::vector<BundledProgram> bundledPrograms(const std::filesystem::path& corpusRoot) {
  namespace fs = std::filesystem;
  std::vector<BundledProgram> out;
  for (const auto& dir : fs::directory_iterator(corpusRoot)) {
    if (!dir.is_directory() || dir.path().filename() == "negative") continue;
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (file.path().extension() != ".fml") continue;
      std::vector<fs::path> factDirs;
      for (const auto& sub : fs::directory_iterator(dir.path()))
        if (sub.is_directory()) factDirs.push_back(sub.path());
      std::sort(factDirs.begin(), factDirs.end());
      std::string stem = file.path().stem().string();
      if (factDirs.empty()) {
        out.push_back({stem, file.path(), {}});
      } else {
        for (const fs::path& d : factDirs) out.push_back({stem + "/" + d.filename().string(), file.path(), {d}});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

syntax::SourceProgram permuteProgram(syntax::SourceProgram p, std::mt19937_64& rng) {
  std::shuffle(p.clauses.begin(), p.clauses.end(), rng);
  for (syntax::Clause& c : p.clauses) std::shuffle(c.body.begin(), c.body.end(), rng);
  return p;
}

std::string randomDatalogProgram(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int inputs = pick(1, 2);
  const int relations = pick(inputs + 1, 5);
  std::vector<int> arity(relations);
  for (int& a : arity) a = pick(1, 2);

  std::string src;
  for (int r = 0; r < relations; ++r) {
    src += r < inputs ? "declare input r" : "declare output r";
    src += std::to_string(r) + "(i32" + (arity[r] == 2 ? ", i32" : "") + ").\n";
  }

  auto atom = [&](int r, const std::vector<std::string>& args) {
    std::string s = "r" + std::to_string(r) + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i];
    return s + ")";
  };

  const int rules = pick(1, 8);
  const char* vars[] = {"A", "B", "C", "D"};
  for (int i = 0; i < rules; ++i) {
    int head = pick(inputs, relations - 1);
    std::vector<std::string> body;
    std::vector<std::string> bound;
    int positives = pick(1, 3);
    for (int k = 0; k < positives; ++k) {
      // Dependencies never point upwards, so negating only lower relations
      // keeps the program stratified.
      int r = pick(0, head);
      std::vector<std::string> args;
      for (int j = 0; j < arity[r]; ++j) {
        int choice = pick(0, 5);
        if (choice == 5) {
          args.push_back(std::to_string(pick(0, 4)));
        } else {
          std::string v = vars[choice % 4];
          args.push_back(v);
          if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
        }
      }
      body.push_back(atom(r, args));
    }
    if (bound.empty()) {
      body.push_back("A = " + std::to_string(pick(0, 4)));
      bound.push_back("A");
    }
    auto boundVar = [&] { return bound[pick(0, static_cast<int>(bound.size()) - 1)]; };
    if (head > 0 && pick(0, 2) == 0) {
      int r = pick(0, head - 1);
      std::vector<std::string> args;
      for (int j = 0; j < arity[r]; ++j) args.push_back(boundVar());
      body.push_back("!" + atom(r, args));
    }
    if (pick(0, 3) == 0) body.push_back(boundVar() + " < " + boundVar() + " + 1");
    if (pick(0, 4) == 0) {
      std::string v = boundVar();
      body.push_back("E = " + v);
      bound.push_back("E");
    }
    std::vector<std::string> headArgs;
    for (int j = 0; j < arity[head]; ++j) headArgs.push_back(boundVar());
    src += atom(head, headArgs) + " :- ";
    for (std::size_t k = 0; k < body.size(); ++k) src += (k ? ", " : "") + body[k];
    src += ".\n";
  }

  const int facts = pick(0, 50);
  for (int i = 0; i < facts; ++i) {
    int r = pick(0, inputs - 1);
    std::vector<std::string> args;
    for (int j = 0; j < arity[r]; ++j) args.push_back(std::to_string(pick(0, 5)));
    src += atom(r, args) + ".\n";
  }
  return src;
}

}  // namespace fmlog::corpus
