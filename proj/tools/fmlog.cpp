#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "fmlog/cli.hpp"
#include "fmlog/corpus.hpp"

int main(int argc, char** argv) {
  using namespace fmlog;

  CLI::App app{"Datalog with first-class formulae"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> dumps;
  CLI::App* run = app.add_subcommand("run", "Evaluate a program and print output relations");
  run->add_option("program", cfg.programPath, "Source file")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--facts", cfg.factDirs, "Directory of <relation>.tsv fact files (repeatable)")
      ->check(CLI::ExistingDirectory);
  run->add_option("--dump", dumps, "Relation to print, or 'all' for every output relation (repeatable)");
  run->add_option("--smt", cfg.smtBackend, "Solver backend: builtin, external, or external:PATH")
      ->capture_default_str();
  run->add_option("--step-budget", cfg.stepBudget, "Reduction steps allowed per function call")
      ->capture_default_str();
  run->add_option("--seed", cfg.seed, "Seed for work-stealing victim selection");
  run->add_flag("--time", cfg.timingReport, "Print per-stage timings to stderr");

  std::string checkPath;
  CLI::App* check = app.add_subcommand("check", "Parse, type check and validate without evaluating");
  check->add_option("program", checkPath, "Source file")->required()->check(CLI::ExistingFile);

  int n = 0;
  double p = 0.1;
  std::uint64_t seed = 0;
  std::string outDir = ".";
  CLI::App* gen = app.add_subcommand("gen-graph", "Write a random directed graph as e.tsv");
  gen->add_option("-n,--vertices", n, "Vertex count")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("-p,--probability", p, "Edge probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--out", outDir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kUsageExit;
  }

  if (*run) {
    if (!dumps.empty()) cfg.dumpRelations = dumps;
    return cli::run(cfg, std::cout, std::cerr);
  }
  if (*check) {
    try {
      cli::LoadedProgram lp = cli::loadProgramFile(checkPath);
      std::cout << "ok: " << lp.source.ruleCount() << " rules, " << lp.source.factCount() << " facts, "
                << lp.stratified.strata.size() << " strata\n";
      return 0;
    } catch (const Error& e) {
      std::cerr << cli::diagnostic(e, checkPath) << "\n";
      return cli::exitCode(e.stage());
    }
  }
  try {
    std::size_t edges = corpus::writeGraph(outDir, n, p, seed);
    std::cout << "wrote " << edges << " edges to " << (std::filesystem::path(outDir) / "e.tsv").string() << "\n";
  } catch (const Error& e) {
    std::cerr << cli::diagnostic(e, outDir) << "\n";
    return cli::exitCode(e.stage());
  }
  return 0;
}
