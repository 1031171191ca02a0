// Acceptance run: one PASS/FAIL line per criterion.
//
//   spca_acceptance            all criteria
//   spca_acceptance 1 4 6      a subset
//
// Exit status is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../support/oracles.hpp"
#include "spca/data.hpp"
#include "spca/l1.hpp"
#include "spca/methods.hpp"
#include "spca/model.hpp"
#include "spca/oracle.hpp"
#include "spca/primal.hpp"
#include "spca_cli/commands.hpp"

namespace fs = std::filesystem;
using namespace spca;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Oracle-size suite ---------------------------------------------------------

struct SuiteCase {
  std::string family;
  CovarianceMatrix a;
  int k;
};

// Spiked model with both planted supports shrunk to n/4 coordinates each.
CovarianceMatrix small_spiked(int n, std::uint64_t seed) {
  const int q = std::max(2, n / 4);
  Vector v1 = Vector::Zero(n), v2 = Vector::Zero(n);
  v1.head(q).setConstant(1.0 / std::sqrt(q));
  v2.segment(q, q).setConstant(1.0 / std::sqrt(q));
  Matrix sigma = Matrix::Identity(n, n) + 399.0 * v1 * v1.transpose() + 299.0 * v2 * v2.transpose();
  Eigen::LLT<Matrix> llt(sigma);
  Matrix root = llt.matrixL();
  CounterRng rng(seed, 31);
  Matrix acc = Matrix::Zero(n, n);
  for (int s = 0; s < 50; ++s) {
    Vector z(n);
    for (int j = 0; j < n; ++j) z(j) = rng.normal();
    Vector x = root * z;
    acc += x * x.transpose();
  }
  return CovarianceMatrix(acc / 50.0);
}

std::vector<SuiteCase> oracle_suite(int count) {
  std::vector<SuiteCase> out;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(2024, static_cast<std::uint64_t>(i));
    const int n = 6 + static_cast<int>(rng.below(9));
    const int k = 1 + static_cast<int>(rng.below(4));
    const std::uint64_t seed = 10'000 + static_cast<std::uint64_t>(i);
    switch (i % 4) {
      case 0:
        out.push_back({"random", CovarianceMatrix(testing::random_psd(n, seed, 1 + static_cast<int>(rng.below(n)))), k});
        break;
      case 1: {
        GeneratorSpec g;
        g.family = Family::SyntheticExample;
        g.n = n;
        g.seed = seed;
        out.push_back({"synthetic", generate(g), k});
        break;
      }
      case 2: {
        GeneratorSpec g;
        g.family = Family::ControllingSparsity;
        g.n = n;
        g.seed = seed;
        g.planted_k = 1 + static_cast<int>(rng.below(n));
        out.push_back({"sparsity", generate(g), k});
        break;
      }
      default:
        out.push_back({"spiked", small_spiked(n, seed), k});
    }
  }
  return out;
}

SolveOptions suite_options(Method m, int k, std::uint64_t seed) {
  SolveOptions o;
  o.method = m;
  o.k = k;
  o.ipos = 5;
  o.pieces = 3;
  o.iterations = 3;
  o.seed = seed;
  o.max_nodes = 150;
  o.deterministic = true;
  return o;
}

struct SuiteRun {
  double exact = 0.0;
  Vector exact_x;
  SolveResult convex, pert;
};

const std::vector<SuiteRun>& suite_runs() {
  static const std::vector<SuiteRun> runs = [] {
    std::vector<SuiteRun> out;
    const auto suite = oracle_suite(500);
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const auto& c = suite[i];
      SuiteRun r;
      auto ex = exact_spca(c.a, c.k);
      r.exact = ex.value;
      r.exact_x = ex.x;
      r.convex = solve(c.a, suite_options(Method::ConvexIp, c.k, i));
      r.pert = solve(c.a, suite_options(Method::PertConvexIp, c.k, i));
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

const std::vector<SuiteCase>& suite_cases() {
  static const auto cases = oracle_suite(500);
  return cases;
}

// Criteria ------------------------------------------------------------------

Verdict oracle_sandwich() {
  const auto t0 = Clock::now();
  const auto& runs = suite_runs();
  int violations = 0, checks = 0;
  for (const auto& r : runs) {
    for (const SolveResult* s : {&r.convex, &r.pert}) {
      ++checks;
      const double tol = 1e-7 * std::max(1.0, r.exact);
      if (s->primal_lb > r.exact + tol || r.exact > s->dual_ub + tol) ++violations;
    }
  }
  const double t = seconds_since(t0);
  return {violations == 0 && t < 600, fmt::format("{} violations over {} solves on {} instances ({:.0f} s)", violations,
                                                  checks, runs.size(), t)};
}

Verdict envelope_prop2() {
  int optimal = 0, violations = 0;
  double worst = -1e300;
  const auto& cases = suite_cases();
  const auto& runs = suite_runs();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.convex.status != SolveStatus::Optimal) continue;
    ++optimal;
    const double rho2 = std::pow(ratio_certificate(cases[i].k).rho, 2);
    const double cap = rho2 * r.exact + r.convex.envelope_slack;
    worst = std::max(worst, (r.convex.dual_ub - cap) / cap);
    if (r.convex.dual_ub > cap * (1 + 1e-6)) ++violations;
  }
  return {violations == 0 && optimal > 0,
          fmt::format("{} violations over {} optimal convex-ip solves (max relative excess {:.2e})", violations, optimal,
                      worst)};
}

Verdict theorem1_sandwich() {
  const auto& cases = suite_cases();
  const auto& runs = suite_runs();
  int lb_bad = 0, ub_low = 0, ub_high = 0, optimal = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const int k = cases[i].k;
    const double rho2 = std::pow(ratio_certificate(k).rho, 2);
    const double hi = rho2 * r.exact;
    const double l1_lb = l1_heuristic(cases[i].a.entries(), k, r.exact_x).objective;
    if (l1_lb < r.exact * (1 - 1e-6) || l1_lb > hi * (1 + 1e-6)) ++lb_bad;
    const auto l1 = solve(cases[i].a, suite_options(Method::PertConvexIpL1, k, i));
    if (l1.dual_ub < r.exact * (1 - 1e-6)) ++ub_low;
    if (l1.status == SolveStatus::Optimal) {
      ++optimal;
      if (l1.dual_ub > hi * (1 + 1e-6) + l1.envelope_slack) ++ub_high;
    }
  }
  return {lb_bad + ub_low + ub_high == 0,
          fmt::format("l1 LB outside [exact, rho^2 exact]: {}; UB below exact: {}; UB above rho^2 exact + slack: {} "
                      "({} optimal of {})",
                      lb_bad, ub_low, ub_high, optimal, runs.size())};
}

Verdict pitprops_table() {
  const auto t0 = Clock::now();
  const std::vector<int> cards{5, 2, 2, 1, 1, 1};
  const std::vector<double> lb_paper{3.406, 1.882, 1.364, 1.0, 1.0, 1.0};
  const std::vector<double> gap_paper{0.032, 0.014, 0.038, 0.018, 0.022, 0.012};
  CovarianceMatrix a = pitprops();
  bool ok = true;
  double sum = 0.0;
  std::string parts;
  for (std::size_t c = 0; c < cards.size(); ++c) {
    SolveOptions o;
    o.method = Method::ConvexIp;
    o.k = cards[c];
    o.ipos = 5;
    o.pieces = 3;
    o.budget_s = 60;
    auto r = solve(a, o);
    sum += r.primal_lb;
    if (c > 0 && std::abs(r.primal_lb - lb_paper[c]) > 1e-3) ok = false;
    if (r.gap > 1.5 * gap_paper[c]) ok = false;
    parts += fmt::format(" c{}:{:.3f}/{:.2f}%", c + 1, r.primal_lb, 100 * r.gap);
    a = deflate(a, heuristic_lower_bound(a, o).x);
  }
  if (std::abs(sum - 9.652) > 5e-3) ok = false;
  const double t = seconds_since(t0);
  if (t > 300) ok = false;
  return {ok, fmt::format("LB sum {:.3f};{} ({:.1f} s)", sum, parts, t)};
}

Verdict spiked_recovery() {
  int success = 0;
  bool support_ok = true;
  std::string parts;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorSpec g;
    g.n = 200;
    g.seed = seed;
    SolveOptions o;
    o.method = Method::PertConvexIp;
    o.k = 10;
    o.apply(preset('B'));
    o.budget_s = 600;
    o.gap_tolerance = 0.005;
    o.seed = seed;
    auto r = solve(generate(g), o);
    const bool hit = r.gap <= 0.005 && r.wall_time <= 600;
    success += hit;
    const bool planted = std::all_of(r.incumbent.support.begin(), r.incumbent.support.end(), [](int i) { return i < 20; });
    if (hit && !planted) support_ok = false;
    parts += fmt::format(" s{}:{:.3f}%/{:.0f}s{}", seed, 100 * r.gap, r.wall_time, planted ? "" : "(off-support)");
  }
  return {success >= 4 && support_ok, fmt::format("{}/5 seeds within 0.5%;{}", success, parts)};
}

Verdict envelope_sweep() {
  CounterRng rng(606);
  long checked = 0, bad = 0;
  for (int m = 0; m < 1000; ++m) {
    const int n = 4 + static_cast<int>(rng.below(7));
    const int k = 1 + static_cast<int>(rng.below(n));
    const int pieces = 1 + static_cast<int>(rng.below(6));
    auto spec = eigendecompose(CovarianceMatrix(testing::random_psd(n, 5000 + static_cast<std::uint64_t>(m))));
    auto split = split_at(spec, 0.5 * (spec.eigenvalues(n / 2) + spec.eigenvalues(n / 2 - 1)));
    const ThetaRule rule = m % 2 ? ThetaRule::L1 : ThetaRule::L0;
    ConvexIpModel model = build_model(spec, split, k, {Formulation::Full, rule}, {pieces});
    const int extra = static_cast<int>(rng.below(4));
    for (int e = 0; e < extra; ++e) {
      const int b = static_cast<int>(rng.below(model.grids.size()));
      const double th = model.grids[b].theta;
      model = refine_grid(model, b, (2 * rng.uniform() - 1) * th);
    }
    for (int s = 0; s < 100; ++s) {
      for (const auto& grid : model.grids) {
        if (grid.fixed_zero()) continue;
        const int j = static_cast<int>(rng.below(grid.size() - 1));
        const double t = rng.uniform();
        const double lo = grid.breakpoints[j], hi = grid.breakpoints[j + 1];
        const double g = (1 - t) * lo + t * hi;
        const double xi = (1 - t) * lo * lo + t * hi * hi;
        const double cap = grid.theta * grid.theta / (4.0 * pieces * pieces);
        if (g * g > xi + 1e-12 || xi > g * g + cap + 1e-12) ++bad;
      }
      ++checked;
    }
  }
  return {bad == 0 && checked >= 100'000, fmt::format("{} violations over {} assignments", bad, checked)};
}

Verdict cut_sweep() {
  CounterRng rng(707);
  long checked = 0, bad = 0, incumbent_cut = 0;
  for (int c = 0; c < 100; ++c) {
    const int n = 5 + static_cast<int>(rng.below(26));
    const int k = 1 + static_cast<int>(rng.below(std::min(n, 10)));
    Vector seed_x = c % 2 ? testing::random_unit(n, rng) : testing::random_sparse_unit(n, k, rng);
    Cut cut = make_cut(seed_x, k);
    incumbent_cut += c % 2 == 0 && cut.evaluate(seed_x.cwiseAbs()) > 1e-12;
    for (int s = 0; s < 100; ++s) {
      Vector x = testing::random_sparse_unit(n, k, rng);
      bad += cut.evaluate(x.cwiseAbs()) > 1e-12;
      ++checked;
    }
  }
  return {bad == 0 && incumbent_cut == 0,
          fmt::format("{} violations over {} vectors; seeds cut off: {}", bad, checked, incumbent_cut)};
}

Verdict monotone_refinement() {
  int rises = 0, rounds = 0;
  double worst = 0.0;
  const auto& cases = suite_cases();
  for (int i = 0; i < 50; ++i) {
    const auto& c = cases[static_cast<std::size_t>(i)];
    SolveOptions o = suite_options(Method::PertConvexIp, c.k, static_cast<std::uint64_t>(i));
    o.apply(preset('A'));
    auto r = solve(c.a, o);
    for (std::size_t t = 1; t < r.ub_history.size(); ++t) {
      ++rounds;
      const double rise = r.ub_history[t] - r.ub_history[t - 1];
      worst = std::max(worst, rise);
      if (rise > 1e-9 * std::max(1.0, std::abs(r.ub_history[t - 1]))) ++rises;
    }
  }
  return {rises == 0, fmt::format("{} increases over {} refinement rounds (largest step {:.1e})", rises, rounds, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict bench_determinism() {
  const fs::path dir = fs::temp_directory_path() / "spca_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "suite.json") << R"({"instances": [
    {"name": "pitprops", "matrix": "builtin:pitprops", "k": [2, 5], "methods": ["convex-ip", "pert-convex-ip"], "max_nodes": 200},
    {"name": "synthetic", "generate": {"family": "synthetic", "n": 12, "seed": 3}, "k": 3, "oracle": true, "max_nodes": 200},
    {"name": "spiked", "generate": {"family": "spiked", "n": 30, "seed": 4}, "k": 5, "presets": ["A", "C"], "max_nodes": 100}
  ]})";
  std::vector<std::string> csv, summary;
  for (const char* run : {"a", "b"}) {
    cli::BenchArgs b;
    b.manifest_path = (dir / "suite.json").string();
    b.out_dir = (dir / run).string();
    b.seed = 11;
    b.deterministic = true;
    if (cli::cmd_bench(b) != cli::kOk) return {false, "bench exited with an error"};
    csv.push_back(slurp(dir / run / "results.csv"));
    summary.push_back(slurp(dir / run / "summary.json"));
  }
  fs::remove_all(dir);
  const bool same = csv[0] == csv[1] && summary[0] == summary[1];
  const auto rows = std::count(csv[0].begin(), csv[0].end(), '\n') - 1;
  return {same && rows > 0, fmt::format("results.csv {} ({} rows), summary.json {}", csv[0] == csv[1] ? "identical" : "differs",
                                        rows, summary[0] == summary[1] ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle sandwich", oracle_sandwich},
      {"full-model envelope", envelope_prop2},
      {"l1 ratio sandwich", theorem1_sandwich},
      {"pitprops table", pitprops_table},
      {"spiked recovery", spiked_recovery},
      {"envelope soundness", envelope_sweep},
      {"cut validity", cut_sweep},
      {"monotone refinement", monotone_refinement},
      {"bench determinism", bench_determinism},
  };
  cli::configure_logging();
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
