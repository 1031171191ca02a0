#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "spca/model.hpp"
#include "spca/primal.hpp"

namespace spca {

/// Range of breakpoint indices [lo, hi] an SOS-2 block may use at a node.
struct Window {
  int lo = 0;
  int hi = 0;

  int width() const noexcept { return hi - lo + 1; }
  bool operator==(const Window&) const = default;
};

struct BnbNode {
  std::vector<Window> windows;  // one per model grid
  double node_ub = std::numeric_limits<double>::infinity();
  int depth = 0;
};

BnbNode root_node(const ConvexIpModel& model);

/// Always-valid bound at a node: lambda + sum_i (lambda_i - lambda) max_{window} gamma^2.
double node_crude_bound(const ConvexIpModel& model, const BnbNode& node);

struct RelaxationOptions {
  double tolerance = 5e-8;
  int max_iterations = 80;
};

struct NodeRelaxation {
  double value = 0.0;         // certified upper bound on the node optimum
  double primal_value = 0.0;  // objective of `point` in the relaxation
  ModelAssignment point;      // eta expanded to the full grid
  double elastic = 0.0;       // total violation absorbed by elastic slacks
  bool degraded = false;      // solver did not reach its tolerance; value may be the crude bound
  int iterations = 0;
};

/// Continuous relaxation of the node: eta >= 0 on the window, sum eta = 1, all
/// other model rows kept. The g-coupling rows and the xi-budget row carry
/// penalized elastic slacks so every node relaxation is feasible; an empty node
/// shows up as a low bound instead of a solver failure.
NodeRelaxation solve_node_relaxation(const ConvexIpModel& model, const BnbNode& node,
                                     const RelaxationOptions& opts = {});

/// eta mass outside the heaviest adjacent pair; zero when eta is SOS-2.
double sos2_violation(const std::vector<double>& eta, int lo, int hi);

/// Among blocks violating SOS-2, splits the one with the largest
/// (lambda_i - lambda) * Var_eta(gamma) at its eta-weighted median breakpoint.
/// Returns nullopt when `point` already satisfies SOS-2.
std::optional<std::pair<BnbNode, BnbNode>> branch(const ConvexIpModel& model, const BnbNode& node,
                                                  const ModelAssignment& point, double tolerance = 1e-7);

struct BnbOptions {
  double time_limit_s = 600.0;
  std::int64_t max_nodes = -1;  // negative: unlimited
  double relative_tolerance = 1e-6;
  /// A bound already known to hold for the model optimum, e.g. from a coarser
  /// grid. Node bounds are clipped to it.
  double bound_cap = std::numeric_limits<double>::infinity();
  int threads = 1;
  RelaxationOptions relaxation;
};

struct BnbResult {
  double dual_ub = std::numeric_limits<double>::infinity();
  double root_bound = std::numeric_limits<double>::infinity();
  SparseLoading incumbent;
  ModelAssignment best_point;  // relaxation point of the node that attains dual_ub
  std::int64_t nodes = 0;
  std::int64_t degraded_nodes = 0;  // relaxations that stopped short of the solver tolerance
  bool exhausted = false;
  bool degraded = false;
};

/// Best-bound branch and bound over the SOS-2 blocks of `model`.
///
/// `a` is the matrix whose sparse PCA value is being bounded (not the
/// perturbed one); relaxation points are rounded to k-sparse loadings of `a`
/// to improve `incumbent`. The returned dual_ub is the largest bound among
/// closed, pruned and still-open nodes, and never below the incumbent value.
BnbResult branch_and_bound(const ConvexIpModel& model, const Matrix& a, SparseLoading incumbent,
                           const BnbOptions& opts = {});

}  // namespace spca
