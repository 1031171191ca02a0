#include <doctest.h>

#include "../support/oracles.hpp"
#include "spca/bnb.hpp"
#include "spca/oracle.hpp"

using namespace spca;
using spca::testing::random_psd;

namespace {

struct Fixture {
  Matrix a;
  ConvexIpModel model;
};

Fixture two_by_two() {
  Matrix a{{2, 0}, {0, 1}};
  auto spec = eigendecompose(CovarianceMatrix(a));
  return {a, build_model(spec, split_at(spec, 1.5), 1, {})};
}

Fixture random_fixture(int n, int k, std::uint64_t seed, Formulation f = Formulation::Full) {
  Matrix a = random_psd(n, seed);
  auto spec = eigendecompose(CovarianceMatrix(a));
  auto split = split_at(spec, 0.5 * (spec.eigenvalues(2) + spec.eigenvalues(3)));
  return {a, build_model(spec, split, k, {f, ThetaRule::L0})};
}

ModelAssignment with_eta(const ConvexIpModel& m, std::vector<std::vector<double>> eta) {
  ModelAssignment p;
  p.x = Vector::Zero(m.n());
  p.y = Vector::Zero(m.n());
  p.eta = std::move(eta);
  return p;
}

}  // namespace

TEST_SUITE("bnb") {
  TEST_CASE("root node spans every grid") {
    auto f = random_fixture(8, 2, 1);
    auto root = root_node(f.model);
    REQUIRE(root.windows.size() == f.model.grids.size());
    for (std::size_t b = 0; b < root.windows.size(); ++b) {
      CHECK(root.windows[b].lo == 0);
      CHECK(root.windows[b].hi == f.model.grids[b].size() - 1);
    }
    CHECK(node_crude_bound(f.model, root) == doctest::Approx(f.model.crude_bound()));
  }

  TEST_CASE("sos2 violation") {
    CHECK(sos2_violation({0, 0.5, 0.5, 0}, 0, 3) == 0.0);
    CHECK(sos2_violation({0.5, 0, 0.5}, 0, 2) == doctest::Approx(0.5));
    CHECK(sos2_violation({0.2, 0.3, 0.3, 0.2}, 0, 3) == doctest::Approx(0.4));
    CHECK(sos2_violation({1.0}, 0, 0) == 0.0);
  }

  TEST_CASE("symmetric mass splits at zero") {
    auto f = two_by_two();
    auto root = root_node(f.model);
    auto kids = branch(f.model, root, with_eta(f.model, {{0.5, 0, 0, 0, 0, 0, 0.5}}));
    REQUIRE(kids.has_value());
    CHECK(f.model.grids[0].breakpoints[kids->first.windows[0].hi] == doctest::Approx(0.0));
    CHECK(kids->first.windows[0] == Window{0, 3});
    CHECK(kids->second.windows[0] == Window{3, 6});
    CHECK(kids->first.depth == 1);
  }

  TEST_CASE("no branching on SOS-2 points") {
    auto f = two_by_two();
    CHECK_FALSE(branch(f.model, root_node(f.model), with_eta(f.model, {{0, 0, 0.3, 0.7, 0, 0, 0}})).has_value());
  }

  TEST_CASE("children cover the parent window") {
    auto f = random_fixture(8, 2, 3);
    auto root = root_node(f.model);
    CounterRng rng(9);
    for (int t = 0; t < 100; ++t) {
      std::vector<std::vector<double>> eta;
      for (const auto& g : f.model.grids) {
        std::vector<double> e(g.size());
        double s = 0;
        for (auto& v : e) s += v = rng.uniform();
        for (auto& v : e) v /= s;
        eta.push_back(e);
      }
      auto kids = branch(f.model, root, with_eta(f.model, eta));
      REQUIRE(kids.has_value());
      int changed = 0;
      for (std::size_t b = 0; b < root.windows.size(); ++b) {
        const auto& l = kids->first.windows[b];
        const auto& r = kids->second.windows[b];
        if (l == root.windows[b]) continue;
        ++changed;
        CHECK(l.lo == root.windows[b].lo);
        CHECK(r.hi == root.windows[b].hi);
        CHECK(l.hi == r.lo);
        CHECK(l.width() >= 2);
        CHECK(r.width() >= 2);
      }
      CHECK(changed == 1);
    }
  }

  TEST_CASE("root relaxation of the two-variable model") {
    auto f = two_by_two();
    auto rel = solve_node_relaxation(f.model, root_node(f.model));
    CHECK_FALSE(rel.degraded);
    CHECK(rel.value >= 2.0 - 1e-12);
    CHECK(rel.value <= 2.0 + 1e-6);
  }

  TEST_CASE("fully fixed node evaluates the objective") {
    auto f = two_by_two();
    BnbNode node = root_node(f.model);
    node.windows[0] = {6, 6};  // g = 1
    auto rel = solve_node_relaxation(f.model, node);
    CHECK(std::abs(rel.value - 2.0) < 1e-7);
    node.windows[0] = {3, 3};  // g = 0: x = 0 leaves lambda
    CHECK(std::abs(solve_node_relaxation(f.model, node).value - 1.5) < 1e-7);
  }

  TEST_CASE("root value dominates lifted sparse points") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      for (auto form : {Formulation::Full, Formulation::Perturbed}) {
        auto f = random_fixture(8, 2, 60 + seed, form);
        auto rel = solve_node_relaxation(f.model, root_node(f.model));
        CHECK_FALSE(rel.degraded);
        CounterRng rng(seed, 4);
        double best = 0.0;
        for (int t = 0; t < 300; ++t) {
          Vector x = testing::random_sparse_unit(8, 2, rng);
          best = std::max(best, model_objective(f.model, lift(f.model, x)));
        }
        CHECK(rel.value >= best - 1e-9);
        CHECK(rel.value >= exact_spca(f.a, 2).value - 1e-9);
        CHECK(rel.value <= f.model.crude_bound() + 1e-9);
      }
    }
  }

  TEST_CASE("children never exceed the parent") {
    auto f = random_fixture(8, 2, 77);
    auto root = root_node(f.model);
    auto rel = solve_node_relaxation(f.model, root);
    auto kids = branch(f.model, root, rel.point);
    REQUIRE(kids.has_value());
    const double left = solve_node_relaxation(f.model, kids->first).value;
    const double right = solve_node_relaxation(f.model, kids->second).value;
    CHECK(std::max(left, right) <= rel.value + 1e-7);
    CHECK(std::max(left, right) >= exact_spca(f.a, 2).value - 1e-9);
  }

  TEST_CASE("two-variable tree closes within the envelope slack") {
    auto f = two_by_two();
    auto res = branch_and_bound(f.model, f.a, make_loading(f.a, Vector{{0, 1}}));
    CHECK(res.exhausted);
    CHECK(res.incumbent.objective == doctest::Approx(2.0));
    CHECK(res.dual_ub >= 2.0);
    CHECK(res.dual_ub <= 2.0 + 0.5 / 36 + 1e-9);
  }

  TEST_CASE("branch and bound brackets the exact value") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      auto f = random_fixture(9, 2, 300 + seed);
      const double exact = exact_spca(f.a, 2).value;
      BnbOptions opts;
      opts.max_nodes = 400;
      auto res = branch_and_bound(f.model, f.a, restricted_eigmax(f.a, {0, 1}), opts);
      CHECK(res.incumbent.objective <= exact * (1 + 1e-12));
      CHECK(res.incumbent.support.size() <= 2);
      CHECK(res.dual_ub >= exact * (1 - 1e-9));
      CHECK(res.dual_ub >= res.incumbent.objective);
      CHECK(res.dual_ub <= res.root_bound + 1e-9);
    }
  }

  TEST_CASE("node limit stops the search") {
    auto f = random_fixture(10, 3, 5);
    BnbOptions opts;
    opts.max_nodes = 3;
    opts.relative_tolerance = 0.0;
    auto res = branch_and_bound(f.model, f.a, restricted_eigmax(f.a, {0, 1, 2}), opts);
    CHECK(res.nodes <= 3);
    CHECK(res.dual_ub >= exact_spca(f.a, 3).value * (1 - 1e-9));
  }
}
