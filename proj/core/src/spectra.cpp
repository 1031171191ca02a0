#include "spca/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spca/errors.hpp"

namespace spca {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-8;

void check_shape_and_symmetry(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError("covariance matrix must be square and non-empty");
  }
  if (!m.allFinite()) throw ValidationError("covariance matrix has non-finite entries");
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double scale = std::max(1.0, std::abs(m(i, j)));
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol * scale) {
        throw ValidationError("covariance matrix is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

CovarianceMatrix::CovarianceMatrix(Matrix entries) {
  check_shape_and_symmetry(entries);
  entries_ = symmetrized(entries);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed during PSD check", 0.0);
  }
  const double scale = std::max(std::abs(entries_.trace()) / static_cast<double>(n()), 1e-300);
  const double min_eig = es.eigenvalues()(0);
  if (min_eig < -kPsdTol * scale) {
    throw ValidationError("covariance matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(min_eig) + ")");
  }
}

CovarianceMatrix::CovarianceMatrix(Matrix entries, Trusted) : entries_(std::move(entries)) {}

CovarianceMatrix CovarianceMatrix::trusted(Matrix entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw ValidationError("covariance matrix must be square and non-empty");
  }
  return CovarianceMatrix(symmetrized(entries), Trusted{});
}

std::uint64_t CovarianceMatrix::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(entries_.data());
  const std::size_t len = static_cast<std::size_t>(entries_.size()) * sizeof(double);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double ThresholdSplit::tail_gap() const noexcept {
  if (tail.empty()) return std::numeric_limits<double>::infinity();
  return lambda - lambda_bar;
}

SpectralData eigendecompose(const CovarianceMatrix& a) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a.entries());
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge", 0.0);
  }
  const int n = a.n();
  // Eigen returns ascending order; reverse and canonicalize signs.
  SpectralData out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues(j) = es.eigenvalues()(n - 1 - j);
    Vector v = es.eigenvectors().col(n - 1 - j);
    v.normalize();
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.eigenvectors.col(j) = v;
  }
  out.source_hash = a.checksum();

  const Matrix recon = out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.transpose();
  const double resid = (recon - a.entries()).cwiseAbs().maxCoeff();
  const double scale = 1.0 + a.entries().cwiseAbs().maxCoeff();
  if (resid > 1e-6 * scale) {
    throw NumericalError("eigendecomposition reconstruction check failed", resid);
  }
  return out;
}

ThresholdSplit split_at(const SpectralData& spec, double lambda) {
  ThresholdSplit s;
  s.lambda = lambda;
  s.lambda_bar = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n(); ++i) {
    if (spec.eigenvalues(i) > lambda) {
      s.upper.push_back(i);
    } else {
      s.tail.push_back(i);
      s.lambda_bar = std::max(s.lambda_bar, spec.eigenvalues(i));
    }
  }
  return s;
}

double eigenvalue_tie_tolerance(const SpectralData& spec) {
  const double scale = std::max(std::abs(spec.lambda_max()), std::abs(spec.lambda_min()));
  return 1e-12 * std::max(scale, 1.0);
}

double perturbation_epsilon(const SpectralData& spec) {
  const double tie = eigenvalue_tie_tolerance(spec);
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < spec.n(); ++i) {
    const double d = spec.eigenvalues(i) - spec.eigenvalues(i + 1);
    if (d > tie) gap = std::min(gap, d);
  }
  if (!std::isfinite(gap)) {
    throw DegenerateSpectrumError("all eigenvalues are equal; no perturbation gap exists");
  }
  double eps = 0.5 * gap;
  if (spec.lambda_max() > 0) eps = std::min(eps, 1e-4 * spec.lambda_max());
  return eps;
}

CovarianceMatrix perturb_distinct(const SpectralData& spec, double lambda) {
  const double tie = eigenvalue_tie_tolerance(spec);
  const Matrix original = spec.eigenvectors * spec.eigenvalues.asDiagonal() * spec.eigenvectors.transpose();
  const double eps = perturbation_epsilon(spec);
  bool hits = false;
  for (int i = 0; i < spec.n(); ++i) hits = hits || std::abs(spec.eigenvalues(i) - lambda) <= tie;
  if (!hits) return CovarianceMatrix::trusted(original);

  const int n = spec.n();
  Vector shifted = spec.eigenvalues;
  for (int i = 0; i < n; ++i) shifted(i) += static_cast<double>(n - 1 - i) / n * eps;
  const Matrix out = spec.eigenvectors * shifted.asDiagonal() * spec.eigenvectors.transpose();
  return CovarianceMatrix::trusted(out);
}

CovarianceMatrix perturb_distinct(const CovarianceMatrix& a, double lambda) {
  const SpectralData spec = eigendecompose(a);
  const double tie = eigenvalue_tie_tolerance(spec);
  bool hits = false;
  for (int i = 0; i < spec.n(); ++i) hits = hits || std::abs(spec.eigenvalues(i) - lambda) <= tie;
  if (!hits) {
    // Still reject a fully degenerate spectrum so callers see a consistent contract.
    (void)perturbation_epsilon(spec);
    return a;
  }
  return perturb_distinct(spec, lambda);
}

CovarianceMatrix flatten_tail(const SpectralData& spec, const ThresholdSplit& split) {
  Vector vals = spec.eigenvalues;
  for (int i : split.tail) vals(i) = split.lambda_bar;
  return CovarianceMatrix::trusted(spec.eigenvectors * vals.asDiagonal() * spec.eigenvectors.transpose());
}

std::pair<double, Vector> principal_submatrix_eigmax(const Matrix& a, std::span<const int> support) {
  const auto m = static_cast<Eigen::Index>(support.size());
  if (m == 0) throw ValidationError("empty support for restricted eigenproblem");
  if (m == 1) {
    Vector v(1);
    v(0) = 1.0;
    return {a(support[0], support[0]), v};
  }
  Matrix sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = a(support[i], support[j]);
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  if (es.info() != Eigen::Success) throw NumericalError("submatrix eigensolve failed", 0.0);
  Vector v = es.eigenvectors().col(m - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return {es.eigenvalues()(m - 1), v};
}

}  // namespace spca
