#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spca/spectra.hpp"

namespace spca {

/// Which relaxation is built: the full model keeps every g_i, the perturbed
/// one flattens the tail spectrum to lambda_bar and drops the tail g_i.
enum class Formulation { Full, Perturbed };

/// How the bounds theta_i on |x^T v_i| are computed.
enum class ThetaRule { L0, L1 };

struct Variant {
  Formulation formulation = Formulation::Full;
  ThetaRule theta = ThetaRule::L0;

  std::string name() const;  // "convex-ip", "pert-convex-ip", "convex-ip-l1", "pert-convex-ip-l1"
  bool operator==(const Variant&) const = default;
};

/// Breakpoints of the piecewise-linear over-estimator of g_i^2 on [-theta_i, theta_i].
struct PiecewiseGrid {
  int index = 0;  // eigen-index i in the upper set
  double theta = 0.0;
  std::vector<double> breakpoints;

  /// theta_i == 0: g_i is fixed to zero and the block carries no SOS-2 choice.
  bool fixed_zero() const noexcept { return breakpoints.size() == 1; }
  int size() const noexcept { return static_cast<int>(breakpoints.size()); }
  /// Largest chord-minus-square gap over all intervals: max (b - a)^2 / 4.
  double max_envelope_gap() const;
  /// Chord value of g^2 at g (g must lie inside the grid).
  double chord(double g) const;
};

/// Uniform grid (j / N) * theta for j = -N..N.
PiecewiseGrid uniform_grid(int index, double theta, int pieces);

/// Valid inequality weights^T y <= rhs on y >= |x| for every k-sparse x with ||x||_2 <= 1.
struct Cut {
  Vector weights;
  double rhs = 0.0;

  double evaluate(const Vector& y) const { return weights.dot(y) - rhs; }
};

/// Cut seeded from `seed_x`: weights equal |x| on its k largest magnitudes and
/// the k-th largest magnitude elsewhere; rhs is the norm of the top-k part.
Cut make_cut(const Vector& seed_x, int k);

struct ModelOptions {
  int pieces = 3;  // N
  /// Restrict y_i >= |x_i| to coordinates i in the upper index set, as printed
  /// in the original display. The default applies it to every coordinate.
  bool literal_l1_rows = false;
};

class ConvexIpModel {
 public:
  Variant variant;
  SpectralData spectral;  // spectrum of the (possibly perturbed) matrix
  ThresholdSplit split;
  int k = 1;
  int pieces = 3;
  bool literal_l1_rows = false;
  std::vector<PiecewiseGrid> grids;  // one per index in split.upper, same order
  Vector tail_theta;                 // theta for split.tail (Full only)
  std::vector<Cut> cuts;
  double slack_cap = 0.0;  // (1 / 4N^2) sum theta_i^2 over the upper set

  int n() const noexcept { return spectral.n(); }
  bool trivial() const noexcept { return split.upper.empty(); }
  double lambda() const noexcept { return split.lambda; }
  /// Objective weight lambda_i - lambda of upper block b.
  double weight(int block) const { return spectral.eigenvalues(split.upper[block]) - split.lambda; }
  /// Coefficient of g_i^2 in the s-coupling row: lambda - lambda_i (Full) or lambda - lambda_bar (Perturbed).
  double tail_weight(int tail_pos) const;
  /// Tail mode of the perturbed model: strictly separated, touching (lambda_bar == lambda) or empty.
  bool tail_separated() const;
  /// Always-valid bound lambda + sum (lambda_i - lambda) theta_i^2.
  double crude_bound() const;

  nlohmann::json to_json() const;
};

/// Outcome of threshold selection.
struct LambdaChoice {
  ThresholdSplit split;
  bool trivial = false;  // LB >= lambda_1: the lower bound is already optimal
};

/// t = min(ipos, n): lambda = lambda_t when lambda_t < LB, otherwise lambda = LB.
LambdaChoice choose_lambda(const SpectralData& spec, double lower_bound, int ipos);

/// Builds the full or perturbed model. For the perturbed formulation
/// `spec` must already be the perturbed spectrum (see perturb_distinct).
/// The warm-start point, when given, adds one breakpoint per block at x^T v_i.
ConvexIpModel build_model(const SpectralData& spec, const ThresholdSplit& split, int k, Variant variant,
                          const ModelOptions& opts = {}, const Vector* warm_start = nullptr);

/// Inserts a breakpoint at g_star in the grid of `block` (no-op within 1e-9 of an existing one).
ConvexIpModel refine_grid(const ConvexIpModel& model, int block, double g_star);

/// Appends a cut. Throws ValidationError for L1-theta models, where the cuts are not valid.
ConvexIpModel add_cut(const ConvexIpModel& model, Cut cut);

/// A point of the model: x, y = |x|, g per upper block with its SOS-2 encoding, s.
struct ModelAssignment {
  Vector x;
  Vector y;
  std::vector<std::vector<double>> eta;  // per block, full grid length
  double s = 0.0;
};

/// SOS-2 lift of x (||x||_2 = 1, ||x||_0 <= k) and its model objective.
ModelAssignment lift(const ConvexIpModel& model, const Vector& x);
double model_objective(const ConvexIpModel& model, const ModelAssignment& p);
/// Largest violation of any model constraint (including SOS-2 adjacency) at p.
double max_violation(const ConvexIpModel& model, const ModelAssignment& p);

}  // namespace spca
