#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spca {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<int>;  // sorted, 0-based

/// Dense symmetric positive semidefinite matrix. Validated on construction.
class CovarianceMatrix {
 public:
  /// Throws ValidationError on non-square, non-finite, asymmetric or
  /// clearly indefinite input. Symmetrizes away rounding-level asymmetry.
  explicit CovarianceMatrix(Matrix entries);

  /// Skips the eigenvalue-based PSD check (symmetry is still enforced).
  static CovarianceMatrix trusted(Matrix entries);

  int n() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  double trace() const { return entries_.trace(); }

  /// FNV-1a over the raw bytes of the entries, used to tie spectra to matrices.
  std::uint64_t checksum() const;

 private:
  struct Trusted {};
  CovarianceMatrix(Matrix entries, Trusted);
  Matrix entries_;
};

/// Eigenpairs sorted non-increasing; eigenvector j is column j.
struct SpectralData {
  Vector eigenvalues;
  Matrix eigenvectors;
  std::uint64_t source_hash = 0;

  int n() const noexcept { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues(0); }
  double lambda_min() const { return eigenvalues(eigenvalues.size() - 1); }
  Eigen::Ref<const Vector> vec(int i) const { return eigenvectors.col(i); }
};

/// Threshold split of the spectrum around a lower bound lambda.
///
/// `upper` holds the indices with eigenvalue strictly above `lambda`, the
/// rest form the tail. `lambda_bar` is the largest tail eigenvalue, or
/// -infinity when the tail is empty.
struct ThresholdSplit {
  double lambda = 0.0;
  double lambda_bar = 0.0;
  IndexSet upper;
  IndexSet tail;

  bool has_tail() const noexcept { return !tail.empty(); }
  /// lambda - lambda_bar; zero when the tail touches lambda.
  double tail_gap() const noexcept;
};

/// Symmetric eigendecomposition with a deterministic sign convention: the
/// first component of each eigenvector whose magnitude exceeds 1e-12 is positive.
SpectralData eigendecompose(const CovarianceMatrix& a);

/// Split `spec` at `lambda` (indices with eigenvalue > lambda go to `upper`).
ThresholdSplit split_at(const SpectralData& spec, double lambda);

/// Shift used to separate a repeated eigenvalue: min(gap / 2, 1e-4 * lambda_1),
/// where gap is the minimum difference between distinct eigenvalues.
double perturbation_epsilon(const SpectralData& spec);

/// Returns A + V diag(shift) V^T where eigenvalue i (0-based, descending)
/// receives (n - 1 - i) / n * eps. The largest eigenvalue gets the largest
/// shift, the smallest none. Identity when lambda is not an eigenvalue.
/// Throws DegenerateSpectrumError when all eigenvalues coincide.
CovarianceMatrix perturb_distinct(const CovarianceMatrix& a, double lambda);

/// Same as above, reusing an existing decomposition of `a`.
CovarianceMatrix perturb_distinct(const SpectralData& spec, double lambda);

/// Replace every tail eigenvalue with lambda_bar; the result dominates A.
CovarianceMatrix flatten_tail(const SpectralData& spec, const ThresholdSplit& split);

/// Largest eigenvalue of the principal submatrix A[I, I] and its unit
/// eigenvector (length |I|). Throws ValidationError on empty I.
std::pair<double, Vector> principal_submatrix_eigmax(const Matrix& a, std::span<const int> support);

/// Tolerance used to decide that two eigenvalues are equal.
double eigenvalue_tie_tolerance(const SpectralData& spec);

// Matrix file I/O ---------------------------------------------------------

/// Reads the plain-text format: first line `n`, then n rows of n values
/// separated by whitespace and/or commas. Rejects asymmetry above 1e-9.
CovarianceMatrix read_matrix_file(const std::string& path);
CovarianceMatrix parse_matrix_text(const std::string& text);

/// Writes the same format using round-trip ("%.17g") precision.
void write_matrix_file(const std::string& path, const CovarianceMatrix& a);
std::string format_matrix_text(const CovarianceMatrix& a);

}  // namespace spca
