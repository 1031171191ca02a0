#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "../support/oracles.hpp"
#include "spca/data.hpp"
#include "spca/primal.hpp"
#include "spca/spectra.hpp"

using namespace spca;
using spca::testing::brute_force_spca;
using spca::testing::random_psd;

TEST_SUITE("primal") {
  TEST_CASE("top_k_support examples") {
    CHECK(top_k_support(Vector{{0.1, -0.9, 0.5}}, 2) == IndexSet{1, 2});
    CHECK(top_k_support(Vector{{1, 1, 1}}, 2) == IndexSet{0, 1});
  }

  TEST_CASE("top_k_support matches a full sort") {
    CounterRng rng(42);
    for (int t = 0; t < 50; ++t) {
      Vector v(50);
      for (int i = 0; i < 50; ++i) v(i) = rng.normal();
      std::vector<int> order(50);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
      IndexSet expect(order.begin(), order.begin() + 10);
      std::sort(expect.begin(), expect.end());
      CHECK(top_k_support(v, 10) == expect);
    }
  }

  TEST_CASE("restricted_eigmax on small cases") {
    Matrix a{{2, 1}, {1, 2}};
    auto one = restricted_eigmax(a, {0});
    CHECK(one.objective == doctest::Approx(2.0));
    CHECK(std::abs(one.x(0)) == doctest::Approx(1.0));
    CHECK(one.x(1) == 0.0);
    CHECK(restricted_eigmax(a, {0, 1}).objective == doctest::Approx(3.0));
  }

  TEST_CASE("restricted_eigmax matches a dense submatrix eigensolve") {
    Matrix a = random_psd(10, 8);
    IndexSet s{1, 4, 6, 9};
    Matrix sub(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) sub(i, j) = a(s[i], s[j]);
    auto r = restricted_eigmax(a, s);
    CHECK(std::abs(r.objective - testing::max_eig(sub)) < 1e-12);
    CHECK(std::abs(r.x.norm() - 1.0) < 1e-12);
    CHECK(std::abs(r.x.dot(a * r.x) - r.objective) < 1e-12);
  }

  TEST_CASE("isotropic matrix gives objective one") {
    CovarianceMatrix a(Matrix::Identity(8, 8));
    HeuristicConfig cfg;
    cfg.k = 3;
    CHECK(best_of_restarts(a, cfg).objective == doctest::Approx(1.0));
  }

  TEST_CASE("planted support recovery on a spiked instance") {
    GeneratorSpec g;
    g.n = 50;
    g.seed = 4;
    CovarianceMatrix a = generate(g);
    HeuristicConfig cfg;
    cfg.k = 10;
    cfg.restarts = 20;
    cfg.eigenvector_start = false;
    std::vector<SparseLoading> runs;
    best_of_restarts(a, cfg, &runs);
    REQUIRE(runs.size() == 20);
    int hits = 0;
    IndexSet planted(10);
    std::iota(planted.begin(), planted.end(), 0);
    for (const auto& r : runs) hits += r.support == planted;
    CHECK(hits >= 15);
  }

  TEST_CASE("heuristic never exceeds the optimum and usually attains it") {
    int exact = 0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
      CovarianceMatrix a(random_psd(12, 500 + t));
      HeuristicConfig cfg;
      cfg.k = 3;
      cfg.rng_seed = t;
      const double h = best_of_restarts(a, cfg).objective;
      const double opt = brute_force_spca(a.entries(), 3);
      CHECK(h <= opt * (1 + 1e-12));
      exact += h >= opt * (1 - 1e-6);
    }
    CHECK(exact >= 0.9 * trials);
  }

  TEST_CASE("heuristic upper containment on the oracle range") {
    for (int t = 0; t < 100; ++t) {
      CounterRng rng(900, t);
      const int n = 6 + static_cast<int>(rng.below(9));
      const int k = 1 + static_cast<int>(rng.below(4));
      CovarianceMatrix a(random_psd(n, 1000 + t));
      HeuristicConfig cfg;
      cfg.k = k;
      cfg.rng_seed = t;
      CHECK(best_of_restarts(a, cfg).objective <= brute_force_spca(a.entries(), k) * (1 + 1e-12));
    }
  }

  TEST_CASE("iterates improve monotonically") {
    for (int t = 0; t < 20; ++t) {
      CovarianceMatrix a(random_psd(15, 50 + t));
      HeuristicConfig cfg;
      cfg.k = 4;
      cfg.stop_on_repeat = false;
      HeuristicTrace trace;
      primal_heuristic(a, cfg, random_start(a.entries(), 4, t, 0), &trace);
      for (std::size_t i = 1; i < trace.objectives.size(); ++i)
        CHECK(trace.objectives[i] >= trace.objectives[i - 1] - 1e-12);
    }
  }

  TEST_CASE("same seed gives identical output") {
    CovarianceMatrix a(random_psd(20, 3));
    HeuristicConfig cfg;
    cfg.k = 5;
    cfg.rng_seed = 17;
    auto r1 = best_of_restarts(a, cfg);
    auto r2 = best_of_restarts(a, cfg);
    CHECK(r1.support == r2.support);
    CHECK((r1.x - r2.x).norm() == 0.0);
    CHECK(r1.objective == r2.objective);
  }

  TEST_CASE("deflation algebra") {
    CovarianceMatrix d = deflate(CovarianceMatrix(Matrix::Identity(2, 2)), Vector{{1, 0}});
    CHECK((d.entries() - Matrix(Vector{{0, 1}}.asDiagonal())).norm() < 1e-15);

    Matrix a = random_psd(8, 21);
    auto s = eigendecompose(CovarianceMatrix(a));
    auto after = eigendecompose(deflate(CovarianceMatrix(a), s.vec(0)));
    CHECK(std::abs(after.lambda_max() - s.eigenvalues(1)) < 1e-10);
  }

  TEST_CASE("pitprops deflation sequence") {
    HeuristicConfig cfg;
    auto comps = deflation_sequence(pitprops(), {5, 2, 2, 1, 1, 1}, cfg);
    REQUIRE(comps.size() == 6);
    CHECK(std::abs(comps[1].objective - 1.882) < 1e-3);
    CHECK(comps[2].objective <= 1.364 + 1e-3);
    for (int c = 3; c < 6; ++c) CHECK(std::abs(comps[c].objective - 1.0) < 1e-3);
  }
}
