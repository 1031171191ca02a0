#pragma once

#include <cstdint>
#include <string>

#include "spca/spectra.hpp"

namespace spca::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

struct SolveArgs {
  std::string matrix_path;
  std::string case_name;  // defaults to the file stem
  int k = 1;
  std::string method = "pert-convex-ip";
  char preset = 'B';
  double budget_s = 600.0;
  std::int64_t max_nodes = -1;
  double gap_tolerance = 1e-6;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;
  std::string out_path;  // JSON; the CSV row is appended to the sibling .csv
};

struct GenerateArgs {
  std::string family = "spiked";  // spiked, synthetic, sparsity or pitprops
  int n = 200;
  int m = 50;
  std::uint64_t seed = 0;
  std::string out_path;
};

struct BenchArgs {
  std::string manifest_path;
  std::string out_dir;
  double budget_s = 600.0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;
};

int cmd_solve(const SolveArgs& args);
int cmd_generate(const GenerateArgs& args);
int cmd_bench(const BenchArgs& args);

/// Loads a matrix file, or the embedded Pitprops matrix for "builtin:pitprops".
CovarianceMatrix load_matrix(const std::string& path);

/// Sets the spdlog level from SPCA_CERT_LOG (default "warn") and routes logs to stderr.
void configure_logging();

/// Parses argv and dispatches to the commands above.
int run(int argc, char** argv);

}  // namespace spca::cli
