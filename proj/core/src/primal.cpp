#include "spca/primal.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

#include "spca/errors.hpp"
#include "spca/rng.hpp"

namespace spca {

SparseLoading make_loading(const Matrix& a, Vector x) {
  const double nrm = x.norm();
  if (nrm == 0.0) throw ValidationError("loading vector must be nonzero");
  x /= nrm;
  SparseLoading out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) out.support.push_back(static_cast<int>(i));
  }
  out.objective = x.dot(a * x);
  out.x = std::move(x);
  return out;
}

IndexSet top_k_support(const Vector& v, int k) {
  const int n = static_cast<int>(v.size());
  if (k < 1 || k > n) throw ValidationError("top_k_support: k out of range");
  IndexSet idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SparseLoading restricted_eigmax(const Matrix& a, const IndexSet& support) {
  auto [value, sub] = principal_submatrix_eigmax(a, support);
  SparseLoading out;
  out.x = Vector::Zero(a.rows());
  for (std::size_t i = 0; i < support.size(); ++i) out.x(support[i]) = sub(static_cast<Eigen::Index>(i));
  out.support = support;
  out.objective = value;
  return out;
}

Matrix symmetric_sqrt(const SpectralData& spec) {
  const Vector root = spec.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return spec.eigenvectors * root.asDiagonal() * spec.eigenvectors.transpose();
}

SparseLoading primal_heuristic(const Matrix& a, const Matrix& sqrt_a, const HeuristicConfig& cfg,
                               const SparseLoading& x0, HeuristicTrace* trace) {
  SparseLoading best = x0;
  best.objective = x0.x.dot(a * x0.x);
  if (a.cwiseAbs().maxCoeff() == 0.0) return best;

  std::set<IndexSet> seen;
  Vector current = x0.x;
  double obj = best.objective;
  double prev = 0.0;
  int iter = 0;
  while (obj - prev > cfg.epsilon && iter < cfg.max_iters) {
    prev = obj;
    const IndexSet support = top_k_support(sqrt_a.transpose() * current, cfg.k);
    if (cfg.stop_on_repeat && !seen.insert(support).second) break;
    SparseLoading next = restricted_eigmax(a, support);
    obj = next.objective;
    if (trace) {
      trace->objectives.push_back(obj);
      trace->supports.push_back(support);
    }
    current = next.x;
    if (obj > best.objective) best = std::move(next);
    ++iter;
  }
  return best;
}

SparseLoading primal_heuristic(const CovarianceMatrix& a, const HeuristicConfig& cfg, const SparseLoading& x0,
                               HeuristicTrace* trace) {
  const SpectralData spec = eigendecompose(a);
  return primal_heuristic(a.entries(), symmetric_sqrt(spec), cfg, x0, trace);
}

SparseLoading random_start(const Matrix& a, int k, std::uint64_t seed, int restart) {
  const int n = static_cast<int>(a.rows());
  if (k < 1 || k > n) throw ValidationError("random_start: k out of range");
  CounterRng rng(seed, static_cast<std::uint64_t>(restart));
  // Partial Fisher-Yates selects a uniform k-subset.
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  Vector x = Vector::Zero(n);
  for (int i = 0; i < k; ++i) x(pool[i]) = 1.0 / std::sqrt(static_cast<double>(k));
  return make_loading(a, std::move(x));
}

SparseLoading best_of_restarts(const CovarianceMatrix& a, const HeuristicConfig& cfg,
                               std::vector<SparseLoading>* per_restart) {
  if (cfg.k < 1 || cfg.k > a.n()) throw ValidationError("heuristic: k must lie in [1, n]");
  if (cfg.restarts < 1) throw ValidationError("heuristic: restarts must be >= 1");
  const SpectralData spec = eigendecompose(a);
  const Matrix root = symmetric_sqrt(spec);
  const Matrix& m = a.entries();

  std::vector<SparseLoading> results(static_cast<std::size_t>(cfg.restarts));
  auto run = [&](int r) { results[r] = primal_heuristic(m, root, cfg, random_start(m, cfg.k, cfg.rng_seed, r)); };
  if (cfg.threads > 1) {
    std::vector<std::future<void>> jobs;
    for (int t = 0; t < cfg.threads; ++t) {
      jobs.push_back(std::async(std::launch::async, [&, t] {
        for (int r = t; r < cfg.restarts; r += cfg.threads) run(r);
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (int r = 0; r < cfg.restarts; ++r) run(r);
  }

  SparseLoading best = results.front();
  for (const auto& r : results) {
    if (r.objective > best.objective) best = r;
  }
  if (cfg.eigenvector_start) {
    const IndexSet s = top_k_support(spec.eigenvectors.col(0), cfg.k);
    SparseLoading seeded = primal_heuristic(m, root, cfg, restricted_eigmax(m, s));
    if (seeded.objective > best.objective) best = std::move(seeded);
  }
  if (per_restart) *per_restart = std::move(results);
  return best;
}

CovarianceMatrix deflate(const CovarianceMatrix& a, const Vector& x) {
  const int n = a.n();
  const Matrix p = Matrix::Identity(n, n) - x * x.transpose();
  return CovarianceMatrix::trusted(p * a.entries() * p);
}

std::vector<SparseLoading> deflation_sequence(const CovarianceMatrix& a, const std::vector<int>& cardinalities,
                                              const HeuristicConfig& base) {
  std::vector<SparseLoading> out;
  CovarianceMatrix current = a;
  for (int k : cardinalities) {
    HeuristicConfig cfg = base;
    cfg.k = k;
    SparseLoading comp = best_of_restarts(current, cfg);
    current = deflate(current, comp.x);
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace spca
