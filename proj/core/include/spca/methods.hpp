#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spca/bnb.hpp"
#include "spca/model.hpp"
#include "spca/primal.hpp"
#include "spca/spectra.hpp"

namespace spca {

enum class Method { ConvexIp, PertConvexIp, PertConvexIpL1 };

std::string to_string(Method m);
Method method_from_string(const std::string& s);  // "convex-ip", "pert-convex-ip", "pert-convex-ip-l1"

/// (I_pos, N, iterations) settings of the iterated perturbed method.
struct Preset {
  int ipos = 10;
  int pieces = 3;
  int iterations = 3;
};

/// A = (5, 3, 10), B = (10, 3, 3), C = (15, 3, 2).
Preset preset(char name);

enum class SolveStatus { Optimal, TimeLimit, Trivial };
std::string to_string(SolveStatus s);

struct SolveOptions {
  Method method = Method::PertConvexIp;
  int k = 1;
  int ipos = 10;
  int pieces = 3;
  int iterations = 3;  // outer refinement rounds of the perturbed method
  double budget_s = 600.0;
  std::int64_t max_nodes = -1;  // per branch-and-bound run; negative: unlimited
  /// Relative gap at which the search stops and reports Optimal.
  double gap_tolerance = 1e-6;
  std::uint64_t seed = 0;
  int restarts = 20;
  int threads = 1;
  /// Single worker, and the wall-clock budget is not consulted (max_nodes bounds the work).
  bool deterministic = false;
  bool literal_l1_rows = false;
  /// Insert breakpoints at the heuristic point before the first solve.
  bool warm_start_breakpoints = true;
  bool cuts = true;

  void apply(const Preset& p) {
    ipos = p.ipos;
    pieces = p.pieces;
    iterations = p.iterations;
  }
};

struct SolveResult {
  SparseLoading incumbent;
  double primal_lb = 0.0;
  double dual_ub = 0.0;
  double gap = 0.0;
  std::int64_t nodes = 0;
  double wall_time = 0.0;
  SolveStatus status = SolveStatus::TimeLimit;
  double lambda = 0.0;
  std::optional<double> lambda_bar;
  int i1_size = 0;
  std::string variant;
  bool degraded = false;
  bool perturbed = false;         // the spectrum was perturbed to separate lambda_bar from lambda
  std::vector<double> ub_history;  // certified bound after each outer round
  double envelope_slack = 0.0;     // (1 / 4N^2) sum_{I1} (lambda_i - lambda) theta_i^2 of the initial grid
  std::optional<double> l1_lb;     // projected-power value for the l1 variant

  /// JSON document {lb, ub, gap, nodes, seconds, status, lambda, lambda_bar, i1_size, variant, ...}.
  /// `seconds` is null when `with_time` is false.
  nlohmann::json to_json(bool with_time = true) const;
};

/// (ub - lb) / lb; zero when both vanish.
double relative_gap(double lb, double ub);

/// Heuristic lower bound and warm start: best of the seeded restarts.
SparseLoading heuristic_lower_bound(const CovarianceMatrix& a, const SolveOptions& opts);

SolveResult convex_ip_method(const CovarianceMatrix& a, const SolveOptions& opts);
SolveResult pert_convex_ip_method(const CovarianceMatrix& a, const SolveOptions& opts);

/// Dispatches on opts.method.
SolveResult solve(const CovarianceMatrix& a, const SolveOptions& opts);

// Report rows -------------------------------------------------------------

/// "case,method,preset,k,seed,lb,ub,gap,seconds,status"
std::string csv_header();
/// Values use round-trip precision; `seconds` is left empty when `with_time` is false.
std::string csv_row(const std::string& case_name, const std::string& preset_name, int k, std::uint64_t seed,
                    const SolveResult& r, bool with_time = true);

}  // namespace spca
