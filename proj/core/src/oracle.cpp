#include "spca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spca/errors.hpp"

namespace spca {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t acc = 1;
  for (int i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i is exact; divide out the common factor first.
    std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    std::uint64_t den = static_cast<std::uint64_t>(i);
    std::uint64_t g = std::gcd(acc, den);
    acc /= g;
    num /= den / g;
    if (acc > kMax / num) return kMax;
    acc *= num;
  }
  return acc;
}

ExactSolution exact_spca(const Matrix& a, int k, std::uint64_t max_supports) {
  const int n = static_cast<int>(a.rows());
  if (k < 1 || k > n) throw ValidationError("exact_spca: k must lie in [1, n]");
  const std::uint64_t count = binomial(n, k);
  if (count > max_supports) {
    throw GuardError("exact_spca: C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " +
                     std::to_string(count) + " supports exceeds the enumeration guard");
  }
  const double tie = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());

  ExactSolution best;
  best.value = -std::numeric_limits<double>::infinity();
  IndexSet support(k);
  std::iota(support.begin(), support.end(), 0);
  while (true) {
    auto [value, sub] = principal_submatrix_eigmax(a, support);
    if (value > best.value + tie) {
      best.value = value;
      best.support = support;
      best.x = Vector::Zero(n);
      for (int i = 0; i < k; ++i) best.x(support[i]) = sub(i);
    }
    // Next combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && support[i] == n - k + i) --i;
    if (i < 0) break;
    ++support[i];
    for (int j = i + 1; j < k; ++j) support[j] = support[j - 1] + 1;
  }
  return best;
}

ExactSolution exact_spca(const CovarianceMatrix& a, int k, std::uint64_t max_supports) {
  return exact_spca(a.entries(), k, max_supports);
}

}  // namespace spca
