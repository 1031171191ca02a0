#include "spca/methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "spca/errors.hpp"
#include "spca/l1.hpp"

namespace spca {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kDeterministicNodes = 20000;

struct Prepared {
  SpectralData spec;
  SparseLoading start;
  LambdaChoice choice;
};

Prepared prepare(const CovarianceMatrix& a, const SolveOptions& opts) {
  if (opts.k < 1 || opts.k > a.n()) throw ValidationError("k must lie in [1, n]");
  if (opts.ipos < 1) throw ValidationError("I_pos must be at least 1");
  if (opts.pieces < 1) throw ValidationError("N must be at least 1");
  Prepared p;
  p.spec = eigendecompose(a);
  p.start = heuristic_lower_bound(a, opts);
  p.choice = choose_lambda(p.spec, p.start.objective, opts.ipos);
  const double l1 = p.spec.lambda_max();
  if (opts.k == a.n() || p.start.objective >= l1 - 1e-12 * std::max(1.0, std::abs(l1))) p.choice.trivial = true;
  return p;
}

SolveResult trivial_result(const Prepared& p, const SolveOptions& opts, Variant variant) {
  SolveResult r;
  r.incumbent = p.start;
  if (opts.k == p.spec.n()) {
    // Full cardinality: the leading eigenpair is optimal.
    r.incumbent.x = p.spec.vec(0);
    r.incumbent.objective = p.spec.lambda_max();
    r.incumbent.support.resize(opts.k);
    for (int i = 0; i < opts.k; ++i) r.incumbent.support[i] = i;
  }
  r.primal_lb = r.incumbent.objective;
  r.dual_ub = std::max(p.spec.lambda_max(), r.primal_lb);
  r.gap = relative_gap(r.primal_lb, r.dual_ub);
  r.status = SolveStatus::Trivial;
  r.lambda = p.choice.split.lambda;
  if (p.choice.split.has_tail()) r.lambda_bar = p.choice.split.lambda_bar;
  r.i1_size = 0;
  r.variant = variant.name();
  r.ub_history = {r.dual_ub};
  return r;
}

BnbOptions bnb_options(const SolveOptions& opts, double remaining) {
  BnbOptions b;
  b.threads = opts.deterministic ? 1 : std::max(1, opts.threads);
  b.max_nodes = opts.max_nodes;
  b.relative_tolerance = opts.gap_tolerance;
  if (opts.deterministic) {
    b.time_limit_s = kInf;
    if (b.max_nodes < 0) b.max_nodes = kDeterministicNodes;
  } else {
    b.time_limit_s = std::max(0.0, remaining);
  }
  return b;
}

double envelope_slack(const ConvexIpModel& m) {
  double s = 0.0;
  for (int b = 0; b < static_cast<int>(m.grids.size()); ++b) s += m.weight(b) * m.grids[b].theta * m.grids[b].theta;
  return s / (4.0 * m.pieces * m.pieces);
}

void fill_model_fields(SolveResult& r, const ConvexIpModel& m) {
  r.lambda = m.split.lambda;
  if (m.split.has_tail()) r.lambda_bar = m.split.lambda_bar;
  r.i1_size = static_cast<int>(m.split.upper.size());
  r.variant = m.variant.name();
  r.envelope_slack = envelope_slack(m);
}

void finish(SolveResult& r, const Clock::time_point& start) {
  r.primal_lb = r.incumbent.objective;
  r.dual_ub = std::max(r.dual_ub, r.primal_lb);
  r.gap = relative_gap(r.primal_lb, r.dual_ub);
  r.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::ConvexIp: return "convex-ip";
    case Method::PertConvexIp: return "pert-convex-ip";
    case Method::PertConvexIpL1: return "pert-convex-ip-l1";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "convex-ip") return Method::ConvexIp;
  if (s == "pert-convex-ip") return Method::PertConvexIp;
  if (s == "pert-convex-ip-l1") return Method::PertConvexIpL1;
  throw ValidationError("unknown method '" + s + "'");
}

Preset preset(char name) {
  switch (name) {
    case 'A': case 'a': return {5, 3, 10};
    case 'B': case 'b': return {10, 3, 3};
    case 'C': case 'c': return {15, 3, 2};
    default: throw ValidationError(std::string("unknown preset '") + name + "'");
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Trivial: return "trivial";
  }
  return "unknown";
}

double relative_gap(double lb, double ub) {
  if (ub == lb) return 0.0;
  if (lb == 0.0) return kInf;
  return (ub - lb) / std::abs(lb);
}

SparseLoading heuristic_lower_bound(const CovarianceMatrix& a, const SolveOptions& opts) {
  HeuristicConfig cfg;
  cfg.k = opts.k;
  cfg.restarts = std::max(1, opts.restarts);
  cfg.rng_seed = opts.seed;
  cfg.threads = opts.deterministic ? 1 : std::max(1, opts.threads);
  return best_of_restarts(a, cfg);
}

SolveResult convex_ip_method(const CovarianceMatrix& a, const SolveOptions& opts) {
  const auto start = Clock::now();
  const Variant variant{Formulation::Full, ThetaRule::L0};
  Prepared p = prepare(a, opts);
  if (p.choice.trivial) {
    SolveResult r = trivial_result(p, opts, variant);
    finish(r, start);
    return r;
  }

  ModelOptions mo{opts.pieces, opts.literal_l1_rows};
  ConvexIpModel model =
      build_model(p.spec, p.choice.split, opts.k, variant, mo, opts.warm_start_breakpoints ? &p.start.x : nullptr);
  if (opts.cuts) model = add_cut(model, make_cut(p.start.x, opts.k));

  SolveResult r;
  fill_model_fields(r, model);
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  BnbResult b = branch_and_bound(model, a.entries(), p.start, bnb_options(opts, opts.budget_s - elapsed));
  r.incumbent = b.incumbent;
  r.nodes = b.nodes;
  r.degraded = b.degraded;
  r.dual_ub = std::min(b.dual_ub, p.spec.lambda_max());
  r.ub_history = {r.dual_ub};
  r.status = b.exhausted ? SolveStatus::Optimal : SolveStatus::TimeLimit;
  finish(r, start);
  return r;
}

SolveResult pert_convex_ip_method(const CovarianceMatrix& a, const SolveOptions& opts) {
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  const ThetaRule rule = opts.method == Method::PertConvexIpL1 ? ThetaRule::L1 : ThetaRule::L0;
  const Variant variant{Formulation::Perturbed, rule};
  Prepared p = prepare(a, opts);
  if (p.choice.trivial) {
    SolveResult r = trivial_result(p, opts, variant);
    if (rule == ThetaRule::L1) r.l1_lb = l1_heuristic(a.entries(), opts.k, p.start.x).objective;
    finish(r, start);
    return r;
  }

  SolveResult r;
  SpectralData spec = p.spec;
  ThresholdSplit split = p.choice.split;
  if (split.has_tail() && split.tail_gap() <= eigenvalue_tie_tolerance(spec)) {
    CovarianceMatrix perturbed = perturb_distinct(spec, split.lambda);
    spec = eigendecompose(perturbed);
    split = split_at(spec, split.lambda);
    r.perturbed = true;
  }

  ModelOptions mo{opts.pieces, opts.literal_l1_rows};
  ConvexIpModel model =
      build_model(spec, split, opts.k, variant, mo, opts.warm_start_breakpoints ? &p.start.x : nullptr);
  const bool use_cuts = opts.cuts && rule == ThetaRule::L0;
  if (use_cuts) model = add_cut(model, make_cut(p.start.x, opts.k));
  fill_model_fields(r, model);

  r.incumbent = p.start;
  r.dual_ub = p.spec.lambda_max();
  bool exhausted = false;
  const int rounds = std::max(1, opts.iterations);
  for (int it = 0; it < rounds; ++it) {
    if (it > 0 && !opts.deterministic && elapsed() >= opts.budget_s) break;
    // A refined model never exceeds its predecessor, so the last bound caps this round.
    BnbOptions bo = bnb_options(opts, opts.budget_s - elapsed());
    bo.bound_cap = r.dual_ub;
    BnbResult b = branch_and_bound(model, a.entries(), r.incumbent, bo);
    r.incumbent = b.incumbent;
    r.nodes += b.nodes;
    r.degraded = r.degraded || b.degraded;
    r.ub_history.push_back(b.dual_ub);
    r.dual_ub = std::min(r.dual_ub, b.dual_ub);
    exhausted = b.exhausted;
    spdlog::info("{} round {}: ub={:.6f} lb={:.6f} nodes={}", variant.name(), it + 1, b.dual_ub,
                 r.incumbent.objective, b.nodes);
    if (relative_gap(r.incumbent.objective, r.dual_ub) <= opts.gap_tolerance) break;
    if (it + 1 == rounds) break;

    const Vector& xh = b.best_point.x.size() == model.n() ? b.best_point.x : r.incumbent.x;
    for (int blk = 0; blk < static_cast<int>(model.grids.size()); ++blk)
      model = refine_grid(model, blk, spec.vec(model.grids[blk].index).dot(xh));
    if (use_cuts && xh.cwiseAbs().maxCoeff() > 0.0) model = add_cut(model, make_cut(xh, opts.k));
  }
  r.status = exhausted ? SolveStatus::Optimal : SolveStatus::TimeLimit;
  if (rule == ThetaRule::L1) r.l1_lb = l1_heuristic(a.entries(), opts.k, r.incumbent.x).objective;
  finish(r, start);
  return r;
}

SolveResult solve(const CovarianceMatrix& a, const SolveOptions& opts) {
  return opts.method == Method::ConvexIp ? convex_ip_method(a, opts) : pert_convex_ip_method(a, opts);
}

}  // namespace spca
