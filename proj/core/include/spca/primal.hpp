#pragma once

#include <cstdint>
#include <vector>

#include "spca/spectra.hpp"

namespace spca {

/// A feasible point of the sparse PCA problem together with its value.
struct SparseLoading {
  Vector x;
  IndexSet support;
  double objective = 0.0;

  int n() const noexcept { return static_cast<int>(x.size()); }
};

/// Build a loading from a dense vector (normalized, support read off the nonzeros).
SparseLoading make_loading(const Matrix& a, Vector x);

struct HeuristicConfig {
  int k = 1;
  double epsilon = 1e-6;
  int max_iters = 20;
  int restarts = 20;
  std::uint64_t rng_seed = 0;
  /// Stop as soon as a support repeats.
  bool stop_on_repeat = true;
  /// Also start once from the top-k truncation of the leading eigenvector.
  bool eigenvector_start = true;
  int threads = 1;
};

/// Indices of the k largest |v_i|, ties to the lower index, returned sorted ascending.
IndexSet top_k_support(const Vector& v, int k);

/// Leading eigenpair of A[I, I] embedded back into R^n.
SparseLoading restricted_eigmax(const Matrix& a, const IndexSet& support);

/// Per-iteration trace of the alternating heuristic.
struct HeuristicTrace {
  std::vector<double> objectives;
  std::vector<IndexSet> supports;
};

/// Alternating support update of the primal algorithm from one start point.
/// `sqrt_a` is a square root of A (A = sqrt_a^T sqrt_a). Returns the best iterate.
SparseLoading primal_heuristic(const Matrix& a, const Matrix& sqrt_a, const HeuristicConfig& cfg,
                               const SparseLoading& x0, HeuristicTrace* trace = nullptr);

/// Convenience overload computing the symmetric square root from a decomposition.
SparseLoading primal_heuristic(const CovarianceMatrix& a, const HeuristicConfig& cfg, const SparseLoading& x0,
                               HeuristicTrace* trace = nullptr);

/// Symmetric square root E diag(sqrt(max(lambda, 0))) E^T.
Matrix symmetric_sqrt(const SpectralData& spec);

/// Random start for restart `r`: uniform k-subset with weights 1/sqrt(k).
SparseLoading random_start(const Matrix& a, int k, std::uint64_t seed, int restart);

/// Runs all restarts and keeps the best (ties to the lowest restart index).
SparseLoading best_of_restarts(const CovarianceMatrix& a, const HeuristicConfig& cfg,
                               std::vector<SparseLoading>* per_restart = nullptr);

/// (I - x x^T) A (I - x x^T).
CovarianceMatrix deflate(const CovarianceMatrix& a, const Vector& x);

/// Sequence of sparse components extracted by heuristic + deflation.
std::vector<SparseLoading> deflation_sequence(const CovarianceMatrix& a, const std::vector<int>& cardinalities,
                                              const HeuristicConfig& base);

}  // namespace spca
