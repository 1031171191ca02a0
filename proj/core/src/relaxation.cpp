#include <algorithm>
#include <cmath>

#include "spca/bnb.hpp"
#include "spca/conic.hpp"
#include "spca/errors.hpp"

namespace spca {

namespace {

using Triplet = Eigen::Triplet<double>;

struct Row {
  std::vector<std::pair<int, double>> coef;
  double h = 0.0;
};

// Column layout of the node cone program.
struct Layout {
  int n = 0;
  int x = 0, y = 0, s = -1;
  std::vector<int> eta;  // first eta column per block
  std::vector<int> elastic;  // e+ column per block, e- follows
  int e_xi = -1, e_lo = -1;
  int cols = 0;
};

enum class Coupling { FullTail, FullNoTail, PertSeparated, PertTouching, PertNoTail };

Coupling coupling_of(const ConvexIpModel& m) {
  if (m.variant.formulation == Formulation::Full) return m.split.has_tail() ? Coupling::FullTail : Coupling::FullNoTail;
  if (!m.split.has_tail()) return Coupling::PertNoTail;
  return m.tail_separated() ? Coupling::PertSeparated : Coupling::PertTouching;
}

class Builder {
 public:
  Builder(const ConvexIpModel& m, const BnbNode& node) : m_(m), node_(node) {}

  ConeProgram build(Layout& lay) {
    const int n = m_.n();
    const Coupling cp = coupling_of(m_);
    lay.n = n;
    lay.x = 0;
    lay.y = n;
    int col = 2 * n;

    std::vector<int> weighted_tail;
    if (cp == Coupling::FullTail) {
      for (int q = 0; q < static_cast<int>(m_.split.tail.size()); ++q)
        if (m_.tail_weight(q) > 0.0) weighted_tail.push_back(q);
    }
    const bool has_s = (cp == Coupling::FullTail && !weighted_tail.empty()) || cp == Coupling::PertSeparated;
    if (has_s) lay.s = col++;
    for (const auto& w : node_.windows) {
      lay.eta.push_back(col);
      col += w.width();
    }
    for (std::size_t b = 0; b < node_.windows.size(); ++b) {
      lay.elastic.push_back(col);
      col += 2;
    }
    lay.e_xi = col++;
    if (cp == Coupling::PertNoTail) lay.e_lo = col++;
    lay.cols = col;

    const auto& spec = m_.spectral;
    const double sqrt_k = std::sqrt(static_cast<double>(m_.k));
    const double d = cp == Coupling::PertSeparated ? m_.split.tail_gap() : 0.0;

    ConeProgram p;
    p.c = Vector::Zero(col);
    p.lower = Vector::Zero(col);
    p.upper = Vector::Zero(col);
    p.lower.segment(lay.x, n).setConstant(-1.0);
    p.upper.segment(lay.x, n).setConstant(1.0);
    p.upper.segment(lay.y, n).setConstant(sqrt_k);

    double weight_sum = 0.0;
    for (int b = 0; b < static_cast<int>(m_.grids.size()); ++b) weight_sum += m_.weight(b);
    const double penalty = 100.0 * (1.0 + weight_sum + (m_.split.lambda - spec.lambda_min()));

    if (has_s) {
      p.c(lay.s) = -1.0;
      p.upper(lay.s) = cp == Coupling::PertSeparated ? d : std::max(0.0, m_.split.lambda - spec.lambda_min());
    }

    // Linear rows.
    std::vector<bool> covered(n, !m_.literal_l1_rows);
    if (m_.literal_l1_rows)
      for (int i : m_.split.upper) covered[i] = true;
    for (int i = 0; i < n; ++i) {
      if (covered[i]) {
        lin({{lay.x + i, 1.0}, {lay.y + i, -1.0}}, 0.0);
        lin({{lay.x + i, -1.0}, {lay.y + i, -1.0}}, 0.0);
      } else {
        lin({{lay.y + i, -1.0}}, 0.0);
      }
    }
    {
      Row r;
      for (int i = 0; i < n; ++i) r.coef.push_back({lay.y + i, 1.0});
      r.h = sqrt_k;
      lin_rows_.push_back(std::move(r));
    }
    for (const auto& cut : m_.cuts) {
      Row r;
      for (int i = 0; i < n; ++i)
        if (cut.weights(i) != 0.0) r.coef.push_back({lay.y + i, cut.weights(i)});
      r.h = cut.rhs;
      lin_rows_.push_back(std::move(r));
    }

    Row xi_row;  // sum of xi, built once and reused
    double xi_max = 0.0;
    for (std::size_t b = 0; b < node_.windows.size(); ++b) {
      const auto& grid = m_.grids[b];
      const auto& w = node_.windows[b];
      double wmax = 0.0;
      for (int j = w.lo; j <= w.hi; ++j) {
        int c = lay.eta[b] + (j - w.lo);
        double gm = grid.breakpoints[j];
        p.c(c) = m_.weight(static_cast<int>(b)) * gm * gm;
        p.upper(c) = 1.0;
        lin({{c, -1.0}}, 0.0);
        xi_row.coef.push_back({c, gm * gm});
        wmax = std::max(wmax, gm * gm);
      }
      xi_max += wmax;
      int ep = lay.elastic[b];
      p.c(ep) = p.c(ep + 1) = -penalty;
      p.upper(ep) = p.upper(ep + 1) = 2.0;
      lin({{ep, -1.0}}, 0.0);
      lin({{ep + 1, -1.0}}, 0.0);
    }
    p.c(lay.e_xi) = -penalty;
    p.upper(lay.e_xi) = xi_max + 1.0;
    lin({{lay.e_xi, -1.0}}, 0.0);

    // sum xi - e_xi (+ s / d) <= 1 + cap, written as a linear row unless the tail cone carries it.
    if (cp != Coupling::FullTail) {
      Row r = xi_row;
      r.coef.push_back({lay.e_xi, -1.0});
      if (cp == Coupling::PertSeparated) r.coef.push_back({lay.s, 1.0 / d});
      r.h = 1.0 + m_.slack_cap;
      lin_rows_.push_back(std::move(r));
    }
    if (cp == Coupling::PertSeparated) {
      // sum xi >= 1 - s / d
      Row r;
      for (auto [c, v] : xi_row.coef) r.coef.push_back({c, -v});
      r.coef.push_back({lay.s, -1.0 / d});
      r.h = -1.0;
      lin_rows_.push_back(std::move(r));
      lin({{lay.s, -1.0}}, 0.0);
    }
    if (cp == Coupling::PertNoTail) {
      Row r;
      for (auto [c, v] : xi_row.coef) r.coef.push_back({c, -v});
      r.coef.push_back({lay.e_lo, -1.0});
      r.h = -1.0;
      lin_rows_.push_back(std::move(r));
      p.c(lay.e_lo) = -penalty;
      p.upper(lay.e_lo) = 1.0;
      lin({{lay.e_lo, -1.0}}, 0.0);
    }
    if (cp == Coupling::FullTail) {
      for (int q = 0; q < static_cast<int>(m_.split.tail.size()); ++q) {
        Vector v = spec.vec(m_.split.tail[q]);
        double th = m_.tail_theta(q);
        Row up, dn;
        for (int i = 0; i < n; ++i) {
          if (v(i) == 0.0) continue;
          up.coef.push_back({lay.x + i, v(i)});
          dn.coef.push_back({lay.x + i, -v(i)});
        }
        up.h = dn.h = th;
        lin_rows_.push_back(std::move(up));
        lin_rows_.push_back(std::move(dn));
      }
    }

    // Cones.
    {
      std::vector<Row> cone;
      cone.push_back(Row{{}, 1.0});
      for (int i = 0; i < n; ++i) cone.push_back(Row{{{lay.x + i, -1.0}}, 0.0});
      cones_.push_back(std::move(cone));
    }
    if (cp == Coupling::FullTail) {
      // sum_tail g^2 <= 1 + cap + e_xi - sum xi
      Row t;
      t.h = 1.0 + m_.slack_cap;
      t.coef.push_back({lay.e_xi, 1.0});
      for (auto [c, v] : xi_row.coef) t.coef.push_back({c, -v});
      std::vector<Row> qs;
      for (int q = 0; q < static_cast<int>(m_.split.tail.size()); ++q) qs.push_back(projection_row(lay, m_.split.tail[q], 1.0));
      rotated(t, std::move(qs));
      if (has_s) {
        Row ts;
        ts.coef.push_back({lay.s, 1.0});
        std::vector<Row> qw;
        for (int q : weighted_tail)
          qw.push_back(projection_row(lay, m_.split.tail[q], std::sqrt(m_.tail_weight(q))));
        rotated(ts, std::move(qw));
      }
    }
    if (cp == Coupling::PertSeparated) {
      // sum_{I1} g^2 <= 1 - s / d
      Row t;
      t.h = 1.0;
      t.coef.push_back({lay.s, -1.0 / d});
      std::vector<Row> qs;
      for (int i : m_.split.upper) qs.push_back(projection_row(lay, i, 1.0));
      rotated(t, std::move(qs));
    }

    // Equalities: v_i^T x - sum gamma eta - e+ + e- = 0 and sum eta = 1.
    std::vector<Triplet> at;
    int arow = 0;
    for (std::size_t b = 0; b < node_.windows.size(); ++b) {
      const auto& grid = m_.grids[b];
      const auto& w = node_.windows[b];
      Vector v = spec.vec(grid.index);
      for (int i = 0; i < n; ++i)
        if (v(i) != 0.0) at.emplace_back(arow, lay.x + i, v(i));
      for (int j = w.lo; j <= w.hi; ++j) {
        double gm = grid.breakpoints[j];
        if (gm != 0.0) at.emplace_back(arow, lay.eta[b] + (j - w.lo), -gm);
        at.emplace_back(arow + 1, lay.eta[b] + (j - w.lo), 1.0);
      }
      at.emplace_back(arow, lay.elastic[b], -1.0);
      at.emplace_back(arow, lay.elastic[b] + 1, 1.0);
      arow += 2;
    }
    p.a.resize(arow, col);
    p.a.setFromTriplets(at.begin(), at.end());
    p.b = Vector::Zero(arow);
    for (int r = 1; r < arow; r += 2) p.b(r) = 1.0;

    // Assemble G and h.
    std::vector<Triplet> gt;
    int rows = 0;
    std::vector<double> h;
    auto emit = [&](const Row& r) {
      for (auto [c, v] : r.coef) gt.emplace_back(rows, c, v);
      h.push_back(r.h);
      ++rows;
    };
    for (const auto& r : lin_rows_) emit(r);
    p.num_linear = rows;
    for (const auto& cone : cones_) {
      for (const auto& r : cone) emit(r);
      p.soc_dims.push_back(static_cast<int>(cone.size()));
    }
    p.g.resize(rows, col);
    p.g.setFromTriplets(gt.begin(), gt.end());
    p.h = Eigen::Map<Vector>(h.data(), rows);
    return p;
  }

 private:
  // Linear row  coef^T z <= h.
  void lin(std::vector<std::pair<int, double>> coef, double h) { lin_rows_.push_back(Row{std::move(coef), h}); }

  // Cone entry -scale * v_i^T x (so that h - G z = scale * v_i^T x).
  Row projection_row(const Layout& lay, int eig, double scale) const {
    Row r;
    Vector v = m_.spectral.vec(eig);
    for (int i = 0; i < lay.n; ++i)
      if (v(i) != 0.0) r.coef.push_back({lay.x + i, -scale * v(i)});
    return r;
  }

  // sum q_j^2 <= t with t = t.h + t.coef^T z and each q_j = h - G z given as a cone row.
  void rotated(const Row& t, std::vector<Row> qs) {
    std::vector<Row> cone;
    Row u0, u1;
    u0.h = (t.h + 1.0) / 2.0;
    u1.h = (t.h - 1.0) / 2.0;
    for (auto [c, v] : t.coef) {
      u0.coef.push_back({c, -v / 2.0});
      u1.coef.push_back({c, -v / 2.0});
    }
    cone.push_back(std::move(u0));
    cone.push_back(std::move(u1));
    for (auto& q : qs) cone.push_back(std::move(q));
    cones_.push_back(std::move(cone));
  }

  const ConvexIpModel& m_;
  const BnbNode& node_;
  std::vector<Row> lin_rows_;
  std::vector<std::vector<Row>> cones_;
};

}  // namespace

BnbNode root_node(const ConvexIpModel& model) {
  BnbNode node;
  for (const auto& g : model.grids) node.windows.push_back({0, g.size() - 1});
  return node;
}

double node_crude_bound(const ConvexIpModel& model, const BnbNode& node) {
  double ub = model.split.lambda;
  for (std::size_t b = 0; b < model.grids.size(); ++b) {
    const auto& bp = model.grids[b].breakpoints;
    const auto& w = node.windows[b];
    double lo = bp[w.lo], hi = bp[w.hi];
    double mx = std::max(lo * lo, hi * hi);
    ub += model.weight(static_cast<int>(b)) * mx;
  }
  return ub;
}

NodeRelaxation solve_node_relaxation(const ConvexIpModel& model, const BnbNode& node, const RelaxationOptions& opts) {
  if (node.windows.size() != model.grids.size()) throw ValidationError("node does not match model");
  for (std::size_t b = 0; b < node.windows.size(); ++b) {
    const auto& w = node.windows[b];
    if (w.lo < 0 || w.hi >= model.grids[b].size() || w.hi < w.lo) throw ValidationError("invalid node window");
  }

  Layout lay;
  Builder builder(model, node);
  ConeProgram prog = builder.build(lay);
  ConeSolverOptions copts;
  copts.tolerance = opts.tolerance;
  copts.max_iterations = opts.max_iterations;
  ConeSolution sol = solve_cone_program(prog, copts);

  NodeRelaxation out;
  out.iterations = sol.iterations;
  const double lam = model.split.lambda;
  const double crude = node_crude_bound(model, node);
  out.degraded = sol.status != ConeStatus::Optimal;
  out.value = std::min(crude, lam + sol.certified_bound);
  out.primal_value = lam + sol.primal_value;

  const int n = model.n();
  const Vector& z = sol.z;
  out.point.x = z.segment(lay.x, n);
  out.point.y = z.segment(lay.y, n);
  out.point.s = lay.s >= 0 ? z(lay.s) : 0.0;
  for (std::size_t b = 0; b < node.windows.size(); ++b) {
    const auto& w = node.windows[b];
    std::vector<double> eta(model.grids[b].size(), 0.0);
    for (int j = w.lo; j <= w.hi; ++j) eta[j] = std::max(0.0, z(lay.eta[b] + (j - w.lo)));
    out.point.eta.push_back(std::move(eta));
    out.elastic += std::abs(z(lay.elastic[b])) + std::abs(z(lay.elastic[b] + 1));
  }
  out.elastic += std::abs(z(lay.e_xi));
  if (lay.e_lo >= 0) out.elastic += std::abs(z(lay.e_lo));
  return out;
}

}  // namespace spca
