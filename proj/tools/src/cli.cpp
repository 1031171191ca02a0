#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "spca/errors.hpp"
#include "spca_cli/commands.hpp"

namespace spca::cli {

int run(int argc, char** argv) {
  CLI::App app{"Certified sparse PCA: feasible loadings with matching dual bounds"};
  app.require_subcommand(1);

  SolveArgs solve;
  std::string preset_s = "B";
  auto* s = app.add_subcommand("solve", "Solve one matrix and report LB, UB and gap");
  s->add_option("matrix", solve.matrix_path, "Matrix file (or builtin:pitprops)")->required();
  s->add_option("--k", solve.k, "Cardinality")->required()->check(CLI::PositiveNumber);
  s->add_option("--method", solve.method)
      ->check(CLI::IsMember({"convex-ip", "pert-convex-ip", "pert-convex-ip-l1"}))
      ->capture_default_str();
  s->add_option("--preset", preset_s, "(I_pos, N, iterations): A=(5,3,10) B=(10,3,3) C=(15,3,2)")
      ->check(CLI::IsMember({"A", "B", "C"}))
      ->capture_default_str();
  s->add_option("--budget-s", solve.budget_s, "Wall-clock budget in seconds")->capture_default_str();
  s->add_option("--max-nodes", solve.max_nodes, "Node limit per branch-and-bound run");
  s->add_option("--gap-tol", solve.gap_tolerance, "Relative gap at which the search stops")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--seed", solve.seed)->capture_default_str();
  s->add_option("--threads", solve.threads)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_flag("--deterministic", solve.deterministic, "Single thread, node budget instead of wall clock");
  s->add_option("--case", solve.case_name, "Case label of the CSV row");
  s->add_option("--out", solve.out_path, "JSON result path; the CSV row goes next to it");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic matrix and its manifest");
  g->add_option("--family", gen.family)
      ->check(CLI::IsMember({"spiked", "synthetic", "sparsity", "pitprops"}))
      ->capture_default_str();
  g->add_option("--n", gen.n)->capture_default_str();
  g->add_option("--m", gen.m, "Sample count")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out_path)->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a suite manifest into results.csv and summary.json");
  b->add_option("manifest", bench.manifest_path)->required()->check(CLI::ExistingFile);
  b->add_option("--out-dir", bench.out_dir)->required();
  b->add_option("--budget-s", bench.budget_s)->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--threads", bench.threads, "Instances solved concurrently")->check(CLI::PositiveNumber);
  b->add_flag("--deterministic", bench.deterministic);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  configure_logging();
  try {
    if (*s) {
      solve.preset = preset_s.front();
      return cmd_solve(solve);
    }
    if (*g) return cmd_generate(gen);
    return cmd_bench(bench);
  } catch (const spca::Error& e) {
    spdlog::error("{}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
  }
  return kRuntimeError;
}

}  // namespace spca::cli
