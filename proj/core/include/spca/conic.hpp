#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "spca/spectra.hpp"

namespace spca {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// maximize c^T z  subject to  A z = b,  h - G z in K,
/// where K is a nonnegative orthant of dimension `num_linear` followed by
/// second-order cones {(t, u) : t >= ||u||} of the listed dimensions.
///
/// `lower`/`upper` describe a box known to contain an optimal solution. It is
/// only used to turn an inexact dual point into a rigorous bound.
struct ConeProgram {
  Vector c;
  SparseMatrix a;
  Vector b;
  SparseMatrix g;
  Vector h;
  int num_linear = 0;
  std::vector<int> soc_dims;
  Vector lower;
  Vector upper;

  int num_vars() const noexcept { return static_cast<int>(c.size()); }
  int num_rows() const noexcept { return static_cast<int>(h.size()); }
  /// Throws ValidationError when the dimensions are inconsistent.
  void validate() const;
};

struct ConeSolverOptions {
  double tolerance = 1e-8;
  /// Reduced accuracy still reported as Optimal once the iterations stall.
  double acceptable_tolerance = 1e-6;
  int max_iterations = 80;
};

enum class ConeStatus { Optimal, Inaccurate, Failed };

struct ConeSolution {
  ConeStatus status = ConeStatus::Failed;
  Vector z;
  double primal_value = 0.0;
  /// Rigorous upper bound on the optimum: dual objective plus the worst case
  /// of the dual residual over the box. +infinity when unavailable.
  double certified_bound = 0.0;
  double primal_residual = 0.0;
  int iterations = 0;
};

/// Primal-dual interior-point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector.
ConeSolution solve_cone_program(const ConeProgram& prog, const ConeSolverOptions& opts = {});

/// Upper bound on the optimum implied by the dual point (y, w); w is
/// projected onto the dual cone first. Exposed for testing.
double dual_certificate(const ConeProgram& prog, const Vector& y, const Vector& w);

}  // namespace spca
