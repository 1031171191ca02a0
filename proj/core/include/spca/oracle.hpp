#pragma once

#include "spca/spectra.hpp"

namespace spca {

struct ExactSolution {
  double value = 0.0;
  IndexSet support;
  Vector x;
};

/// Number of k-subsets of an n-set, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

/// Ground-truth sparse PCA value by enumerating every k-subset support.
/// Ties resolve to the lexicographically smallest support.
/// Throws GuardError when C(n, k) exceeds `max_supports`.
ExactSolution exact_spca(const Matrix& a, int k, std::uint64_t max_supports = 1'000'000);
ExactSolution exact_spca(const CovarianceMatrix& a, int k, std::uint64_t max_supports = 1'000'000);

}  // namespace spca
