#include "spca/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spca/errors.hpp"
#include "spca/l1.hpp"

namespace spca {

namespace {

constexpr double kBreakpointDedup = 1e-9;

double theta_for(const Vector& v, int k, ThetaRule rule) {
  double t = rule == ThetaRule::L0 ? theta_l0(v, k) : theta_l1(v, k);
  return std::min(t, 1.0);
}

// Position of g in the grid: index j with b[j] <= g <= b[j+1].
int locate(const std::vector<double>& b, double g) {
  auto it = std::upper_bound(b.begin(), b.end(), g);
  int j = static_cast<int>(it - b.begin()) - 1;
  return std::clamp(j, 0, static_cast<int>(b.size()) - 2);
}

void insert_breakpoint(PiecewiseGrid& grid, double g) {
  if (grid.fixed_zero()) return;
  g = std::clamp(g, -grid.theta, grid.theta);
  for (double b : grid.breakpoints)
    if (std::abs(b - g) <= kBreakpointDedup) return;
  grid.breakpoints.insert(std::upper_bound(grid.breakpoints.begin(), grid.breakpoints.end(), g), g);
}

}  // namespace

std::string Variant::name() const {
  std::string s = formulation == Formulation::Full ? "convex-ip" : "pert-convex-ip";
  if (theta == ThetaRule::L1) s += "-l1";
  return s;
}

double PiecewiseGrid::max_envelope_gap() const {
  double gap = 0.0;
  for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
    double w = breakpoints[j + 1] - breakpoints[j];
    gap = std::max(gap, 0.25 * w * w);
  }
  return gap;
}

double PiecewiseGrid::chord(double g) const {
  if (fixed_zero()) return 0.0;
  int j = locate(breakpoints, g);
  double a = breakpoints[j], b = breakpoints[j + 1];
  // Chord of t^2 between a and b: (a + b) g - a b.
  return (a + b) * g - a * b;
}

PiecewiseGrid uniform_grid(int index, double theta, int pieces) {
  if (pieces < 1) throw ValidationError("pieces must be positive");
  if (!(theta >= 0.0)) throw ValidationError("theta must be non-negative");
  PiecewiseGrid grid;
  grid.index = index;
  grid.theta = theta;
  if (theta == 0.0) {
    grid.breakpoints = {0.0};
    return grid;
  }
  grid.breakpoints.reserve(2 * pieces + 1);
  for (int j = -pieces; j <= pieces; ++j) grid.breakpoints.push_back(theta * j / pieces);
  grid.breakpoints.front() = -theta;
  grid.breakpoints.back() = theta;
  return grid;
}

Cut make_cut(const Vector& seed_x, int k) {
  const int n = static_cast<int>(seed_x.size());
  if (k < 1 || k > n) throw ValidationError("cut cardinality out of range");
  Vector mag = seed_x.cwiseAbs();
  if (mag.maxCoeff() == 0.0) throw ValidationError("cut seed must be nonzero");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mag(a) > mag(b); });

  Cut cut;
  const double floor_value = mag(order[k - 1]);
  cut.weights = Vector::Constant(n, floor_value);
  double sq = 0.0;
  for (int j = 0; j < k; ++j) {
    cut.weights(order[j]) = mag(order[j]);
    sq += mag(order[j]) * mag(order[j]);
  }
  cut.rhs = std::sqrt(sq);
  return cut;
}

double ConvexIpModel::tail_weight(int tail_pos) const {
  if (variant.formulation == Formulation::Perturbed) return split.lambda - split.lambda_bar;
  return split.lambda - spectral.eigenvalues(split.tail[tail_pos]);
}

bool ConvexIpModel::tail_separated() const {
  return split.has_tail() && split.lambda_bar < split.lambda;
}

double ConvexIpModel::crude_bound() const {
  double ub = split.lambda;
  for (int b = 0; b < static_cast<int>(grids.size()); ++b) ub += weight(b) * grids[b].theta * grids[b].theta;
  return ub;
}

nlohmann::json ConvexIpModel::to_json() const {
  using nlohmann::json;
  json j;
  j["variant"] = variant.name();
  j["n"] = n();
  j["k"] = k;
  j["pieces"] = pieces;
  j["lambda"] = split.lambda;
  j["lambda_bar"] = split.has_tail() ? json(split.lambda_bar) : json(nullptr);
  j["i1"] = split.upper;
  j["slack_cap"] = slack_cap;
  j["literal_l1_rows"] = literal_l1_rows;
  json gs = json::array();
  for (const auto& g : grids)
    gs.push_back({{"index", g.index}, {"theta", g.theta}, {"breakpoints", g.breakpoints}});
  j["grids"] = gs;
  json cs = json::array();
  for (const auto& c : cuts) {
    std::vector<double> w(c.weights.data(), c.weights.data() + c.weights.size());
    cs.push_back({{"weights", w}, {"rhs", c.rhs}});
  }
  j["cuts"] = cs;
  return j;
}

LambdaChoice choose_lambda(const SpectralData& spec, double lower_bound, int ipos) {
  if (ipos < 1) throw ValidationError("I_pos must be at least 1");
  LambdaChoice out;
  if (lower_bound >= spec.lambda_max()) {
    out.trivial = true;
    out.split = split_at(spec, lower_bound);
    return out;
  }
  const int t = std::min(ipos, spec.n());
  const double candidate = spec.eigenvalues(t - 1);
  out.split = split_at(spec, candidate < lower_bound ? candidate : lower_bound);
  return out;
}

ConvexIpModel build_model(const SpectralData& spec, const ThresholdSplit& split, int k, Variant variant,
                          const ModelOptions& opts, const Vector* warm_start) {
  if (k < 1 || k > spec.n()) throw ValidationError("cardinality out of range");
  if (opts.pieces < 1) throw ValidationError("pieces must be positive");
  if (variant.formulation == Formulation::Perturbed && split.has_tail() && !(split.lambda_bar <= split.lambda))
    throw ValidationError("lambda_bar exceeds lambda");

  ConvexIpModel m;
  m.variant = variant;
  m.spectral = spec;
  m.split = split;
  m.k = k;
  m.pieces = opts.pieces;
  m.literal_l1_rows = opts.literal_l1_rows;

  double cap = 0.0;
  for (int i : split.upper) {
    Vector v = spec.vec(i);
    double theta = theta_for(v, k, variant.theta);
    if (theta < 1e-14) theta = 0.0;
    m.grids.push_back(uniform_grid(i, theta, opts.pieces));
    cap += theta * theta;
  }
  m.slack_cap = cap / (4.0 * opts.pieces * opts.pieces);

  if (variant.formulation == Formulation::Full) {
    m.tail_theta.resize(static_cast<Eigen::Index>(split.tail.size()));
    for (std::size_t p = 0; p < split.tail.size(); ++p)
      m.tail_theta(static_cast<Eigen::Index>(p)) = theta_for(spec.vec(split.tail[p]), k, variant.theta);
  }

  if (warm_start != nullptr) {
    for (auto& g : m.grids) insert_breakpoint(g, spec.vec(g.index).dot(*warm_start));
  }
  return m;
}

ConvexIpModel refine_grid(const ConvexIpModel& model, int block, double g_star) {
  if (block < 0 || block >= static_cast<int>(model.grids.size())) throw ValidationError("grid block out of range");
  ConvexIpModel out = model;
  insert_breakpoint(out.grids[block], g_star);
  return out;
}

ConvexIpModel add_cut(const ConvexIpModel& model, Cut cut) {
  if (model.variant.theta == ThetaRule::L1) throw ValidationError("cuts are not valid for the l1 relaxation");
  if (cut.weights.size() != model.n()) throw ValidationError("cut dimension mismatch");
  ConvexIpModel out = model;
  out.cuts.push_back(std::move(cut));
  return out;
}

ModelAssignment lift(const ConvexIpModel& model, const Vector& x) {
  ModelAssignment p;
  p.x = x;
  p.y = x.cwiseAbs();
  double upper_sq = 0.0;
  for (const auto& grid : model.grids) {
    std::vector<double> eta(grid.breakpoints.size(), 0.0);
    const double g = model.spectral.vec(grid.index).dot(x);
    upper_sq += g * g;
    if (grid.fixed_zero()) {
      eta[0] = 1.0;
    } else {
      const double gc = std::clamp(g, -grid.theta, grid.theta);
      int j = locate(grid.breakpoints, gc);
      double a = grid.breakpoints[j], b = grid.breakpoints[j + 1];
      double t = (gc - a) / (b - a);
      eta[j] = 1.0 - t;
      eta[j + 1] = t;
    }
    p.eta.push_back(std::move(eta));
  }
  if (model.variant.formulation == Formulation::Full) {
    for (std::size_t q = 0; q < model.split.tail.size(); ++q) {
      double g = model.spectral.vec(model.split.tail[q]).dot(x);
      p.s += model.tail_weight(static_cast<int>(q)) * g * g;
    }
  } else if (model.tail_separated()) {
    p.s = std::max(0.0, model.split.tail_gap() * (x.squaredNorm() - upper_sq));
  }
  return p;
}

namespace {

double xi_of(const PiecewiseGrid& grid, const std::vector<double>& eta) {
  double xi = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) xi += grid.breakpoints[j] * grid.breakpoints[j] * eta[j];
  return xi;
}

double g_of(const PiecewiseGrid& grid, const std::vector<double>& eta) {
  double g = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) g += grid.breakpoints[j] * eta[j];
  return g;
}

}  // namespace

double model_objective(const ConvexIpModel& model, const ModelAssignment& p) {
  double obj = model.split.lambda - p.s;
  for (std::size_t b = 0; b < model.grids.size(); ++b)
    obj += model.weight(static_cast<int>(b)) * xi_of(model.grids[b], p.eta[b]);
  return obj;
}

double max_violation(const ConvexIpModel& model, const ModelAssignment& p) {
  const auto& spec = model.spectral;
  const int n = model.n();
  double viol = 0.0;
  auto bump = [&](double v) { viol = std::max(viol, v); };

  bump(p.x.squaredNorm() - 1.0);
  bump(p.y.sum() - std::sqrt(static_cast<double>(model.k)));
  for (int i = 0; i < n; ++i) {
    bump(-p.y(i));
    bump(std::abs(p.x(i)) - p.y(i));
  }
  for (const auto& c : model.cuts) bump(c.evaluate(p.y));

  double xi_sum = 0.0, g_sq = 0.0;
  for (std::size_t b = 0; b < model.grids.size(); ++b) {
    const auto& grid = model.grids[b];
    const auto& eta = p.eta[b];
    double total = 0.0;
    int first = -1, last = -1;
    for (std::size_t j = 0; j < eta.size(); ++j) {
      bump(-eta[j]);
      total += eta[j];
      if (eta[j] > 1e-12) {
        if (first < 0) first = static_cast<int>(j);
        last = static_cast<int>(j);
      }
    }
    bump(std::abs(total - 1.0));
    if (first >= 0 && last - first > 1) bump(1.0);  // SOS-2 adjacency
    double g = spec.vec(grid.index).dot(p.x);
    bump(std::abs(g - g_of(grid, eta)));
    xi_sum += xi_of(grid, eta);
    g_sq += g * g;
  }

  if (model.variant.formulation == Formulation::Full) {
    double tail_sq = 0.0, weighted = 0.0;
    for (std::size_t q = 0; q < model.split.tail.size(); ++q) {
      double g = spec.vec(model.split.tail[q]).dot(p.x);
      bump(std::abs(g) - model.tail_theta(static_cast<Eigen::Index>(q)));
      tail_sq += g * g;
      weighted += model.tail_weight(static_cast<int>(q)) * g * g;
    }
    bump(xi_sum + tail_sq - 1.0 - model.slack_cap);
    bump(weighted - p.s);
  } else {
    bump(-p.s);
    if (model.tail_separated()) {
      const double r = 1.0 - p.s / model.split.tail_gap();
      bump(g_sq - r);
      bump(r - xi_sum);
      bump(xi_sum - r - model.slack_cap);
    } else {
      bump(p.s);
      bump(g_sq - 1.0);
      bump(xi_sum - 1.0 - model.slack_cap);
      if (!model.split.has_tail()) bump(1.0 - xi_sum);
    }
  }
  return viol;
}

}  // namespace spca
