#pragma once

#include "spca/spectra.hpp"

namespace spca {

/// The set {x : ||x||_2 <= radius_l2, ||x||_1 <= radius_l1}.
struct BallIntersection {
  double radius_l2 = 1.0;
  double radius_l1 = 1.0;

  static BallIntersection for_cardinality(int k);
  /// radius_l1 >= radius_l2 is the regime where both constraints can bind.
  bool in_sparse_regime() const noexcept { return radius_l1 >= radius_l2; }
  bool contains(const Vector& x, double tol = 1e-12) const;
};

/// Worst-case ratio between the l1 relaxation and sparse PCA.
struct ApproxRatio {
  int k = 1;
  double rho = 1.0;
  double rho_squared() const noexcept { return rho * rho; }
};

ApproxRatio ratio_certificate(int k);

/// Euclidean projection of v onto {||u||_2 <= 1, ||u||_1 <= sqrt(k)}.
Vector project_intersection(const Vector& v, int k);
Vector project_intersection(const Vector& v, const BallIntersection& set);

/// argmax of <d, u> over the same set (the limit of projecting t*d as t grows).
Vector maximize_linear_over_intersection(const Vector& d, int k);

/// Soft-thresholding sign(v) * max(|v| - mu, 0).
Vector soft_threshold(const Vector& v, double mu);

struct L1HeuristicConfig {
  double epsilon = 1e-6;
  int max_iters = 20;
};

struct L1Result {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
};

/// Projected power iteration: y = A x, x = Proj(y). Returns the best iterate.
/// `x0` must lie in the intersection (it is projected if it does not).
L1Result l1_heuristic(const Matrix& a, int k, const Vector& x0, const L1HeuristicConfig& cfg = {});

/// max <x, v> over ||x||_2 <= 1, ||x||_0 <= k: the norm of the k largest |v_j|.
double theta_l0(const Vector& v, int k);

/// max <x, v> over ||x||_2 <= 1, ||x||_1 <= sqrt(k), via
/// min_{mu >= 0} ||soft(v, mu)||_2 + mu sqrt(k) by golden-section search.
double theta_l1(const Vector& v, int k);

}  // namespace spca
