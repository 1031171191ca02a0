#include "spca/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <queue>

#include <spdlog/spdlog.h>

#include "spca/errors.hpp"

namespace spca {

double sos2_violation(const std::vector<double>& eta, int lo, int hi) {
  double total = 0.0, pair = 0.0;
  for (int j = lo; j <= hi; ++j) {
    total += eta[j];
    if (j < hi) pair = std::max(pair, eta[j] + eta[j + 1]);
  }
  if (lo == hi) pair = eta[lo];
  return std::max(0.0, total - pair);
}

std::optional<std::pair<BnbNode, BnbNode>> branch(const ConvexIpModel& model, const BnbNode& node,
                                                  const ModelAssignment& point, double tolerance) {
  // Score: weighted spread of the breakpoints under eta, i.e. the envelope
  // error this block contributes to the relaxation value.
  int best = -1;
  double best_score = -1.0;
  for (std::size_t b = 0; b < node.windows.size(); ++b) {
    const auto& w = node.windows[b];
    if (w.width() < 3) continue;
    const auto& eta = point.eta[b];
    if (sos2_violation(eta, w.lo, w.hi) <= tolerance) continue;
    const auto& gamma = model.grids[b].breakpoints;
    double m1 = 0.0, m2 = 0.0;
    for (int j = w.lo; j <= w.hi; ++j) {
      m1 += eta[j] * gamma[j];
      m2 += eta[j] * gamma[j] * gamma[j];
    }
    const double score = model.weight(static_cast<int>(b)) * std::max(0.0, m2 - m1 * m1);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(b);
    }
  }
  if (best < 0) return std::nullopt;

  const auto& eta = point.eta[best];
  const auto& w = node.windows[best];
  double total = 0.0;
  for (int j = w.lo; j <= w.hi; ++j) total += eta[j];
  const double half = 0.5 * total;
  const double eps = 1e-9 * std::max(total, 1e-300);
  int lower = w.hi, upper = w.hi;
  double cum = 0.0;
  for (int j = w.lo; j <= w.hi; ++j) {
    cum += eta[j];
    if (cum >= half - eps) {
      lower = j;
      break;
    }
  }
  cum = 0.0;
  for (int j = w.lo; j <= w.hi; ++j) {
    cum += eta[j];
    if (cum > half + eps) {
      upper = j;
      break;
    }
  }
  int r = std::clamp((lower + upper) / 2, w.lo + 1, w.hi - 1);

  BnbNode left = node, right = node;
  left.windows[best] = {w.lo, r};
  right.windows[best] = {r, w.hi};
  left.depth = right.depth = node.depth + 1;
  return std::make_pair(std::move(left), std::move(right));
}

namespace {

struct Entry {
  BnbNode node;
  NodeRelaxation relax;
  std::int64_t id = 0;
};

struct EntryOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.node.node_ub != b.node.node_ub) return a.node.node_ub < b.node.node_ub;
    return a.id > b.id;
  }
};

void round_to_incumbent(const Matrix& a, int k, const Vector& x, SparseLoading& incumbent) {
  if (!(x.norm() > 1e-12) || !x.allFinite()) return;
  SparseLoading cand = restricted_eigmax(a, top_k_support(x, k));
  if (cand.objective > incumbent.objective) incumbent = std::move(cand);
}

}  // namespace

BnbResult branch_and_bound(const ConvexIpModel& model, const Matrix& a, SparseLoading incumbent,
                           const BnbOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  BnbResult res;
  res.incumbent = std::move(incumbent);

  std::priority_queue<Entry, std::vector<Entry>, EntryOrder> open;
  std::int64_t next_id = 0;
  double closed_max = -std::numeric_limits<double>::infinity();
  double pruned_max = closed_max;
  double leaf_primal = closed_max;

  auto evaluate = [&](const BnbNode& node) { return solve_node_relaxation(model, node, opts.relaxation); };
  auto admit = [&](BnbNode node, NodeRelaxation relax, double parent_ub) {
    ++res.nodes;
    res.degraded_nodes += relax.degraded;
    res.degraded = res.degraded || relax.degraded;
    round_to_incumbent(a, model.k, relax.point.x, res.incumbent);
    node.node_ub = std::min(parent_ub, relax.value);
    open.push(Entry{std::move(node), std::move(relax), next_id++});
  };

  {
    BnbNode root = root_node(model);
    NodeRelaxation r = evaluate(root);
    res.root_bound = r.value;
    admit(std::move(root), std::move(r), opts.bound_cap);
  }

  bool limit_hit = false;
  ModelAssignment closed_point;
  while (!open.empty()) {
    const double ref = std::max(res.incumbent.objective, leaf_primal);
    const double tol = opts.relative_tolerance * std::max(1.0, std::abs(ref));
    if (open.top().node.node_ub <= ref + tol) {
      pruned_max = std::max(pruned_max, open.top().node.node_ub);
      break;  // best-first: every remaining node is dominated as well
    }
    if (elapsed() > opts.time_limit_s || (opts.max_nodes >= 0 && res.nodes >= opts.max_nodes)) {
      limit_hit = true;
      break;
    }

    Entry cur = open.top();
    open.pop();
    auto children = branch(model, cur.node, cur.relax.point);
    if (!children) {
      if (cur.node.node_ub > closed_max) {
        closed_max = cur.node.node_ub;
        closed_point = cur.relax.point;
      }
      if (cur.relax.elastic <= 1e-7) leaf_primal = std::max(leaf_primal, cur.relax.primal_value);
      continue;
    }

    auto& [left, right] = *children;
    NodeRelaxation rl, rr;
    if (opts.threads > 1) {
      auto fut = std::async(std::launch::async, [&] { return evaluate(right); });
      rl = evaluate(left);
      rr = fut.get();
    } else {
      rl = evaluate(left);
      rr = evaluate(right);
    }
    admit(std::move(left), std::move(rl), cur.node.node_ub);
    admit(std::move(right), std::move(rr), cur.node.node_ub);
  }

  double open_max = -std::numeric_limits<double>::infinity();
  if (!open.empty() && limit_hit) open_max = open.top().node.node_ub;
  res.exhausted = !limit_hit;
  res.dual_ub = std::max({closed_max, pruned_max, open_max, res.incumbent.objective});
  if (open_max >= closed_max && !open.empty())
    res.best_point = open.top().relax.point;
  else if (closed_max > -std::numeric_limits<double>::infinity())
    res.best_point = closed_point;
  else if (!open.empty())
    res.best_point = open.top().relax.point;
  spdlog::debug("bnb: nodes={} degraded={} ub={:.6f} lb={:.6f} exhausted={} t={:.2f}s", res.nodes, res.degraded_nodes, res.dual_ub,
                res.incumbent.objective, res.exhausted, elapsed());
  return res;
}

}  // namespace spca
