#include "spca/l1.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spca/errors.hpp"

namespace spca {

namespace {

// Positive part of a - tau, componentwise.
Vector shrink(const Vector& a, double tau) { return (a.array() - tau).max(0.0).matrix(); }

// tau >= 0 with sum((a - tau)_+) = r for a >= 0 with sum(a) > r.
double l1_threshold(const Vector& a, double r) {
  std::vector<double> s(a.data(), a.data() + a.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double t = (cum - r) / static_cast<double>(j + 1);
    if (j + 1 == s.size() || s[j + 1] <= t) {
      tau = t;
      break;
    }
  }
  return std::max(tau, 0.0);
}

// Both constraints active: find tau with ||(a - tau)_+||_1 = r ||(a - tau)_+||_2.
// The ratio is non-increasing in tau, so bisection is exact up to rounding.
double joint_threshold(const Vector& a, double r) {
  double lo = 0.0;
  double hi = a.maxCoeff();
  auto ratio_excess = [&](double tau) {
    const Vector u = shrink(a, tau);
    const double n2 = u.norm();
    if (n2 == 0.0) return -1.0;
    return u.sum() - r * n2;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_excess(mid) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Vector with_signs(const Vector& magnitude, const Vector& like) {
  Vector out = magnitude;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (like(i) < 0) out(i) = -out(i);
  }
  return out;
}

}  // namespace

BallIntersection BallIntersection::for_cardinality(int k) {
  if (k < 1) throw ValidationError("cardinality must be >= 1");
  return BallIntersection{1.0, std::sqrt(static_cast<double>(k))};
}

bool BallIntersection::contains(const Vector& x, double tol) const {
  return x.norm() <= radius_l2 + tol && x.lpNorm<1>() <= radius_l1 + tol;
}

ApproxRatio ratio_certificate(int k) {
  if (k < 1) throw ValidationError("ratio_certificate: k must be >= 1");
  const double kd = static_cast<double>(k);
  return ApproxRatio{k, 1.0 + std::sqrt(kd / (kd + 1.0))};
}

Vector soft_threshold(const Vector& v, double mu) { return with_signs(shrink(v.cwiseAbs(), mu), v); }

Vector project_intersection(const Vector& v, const BallIntersection& set) {
  const Vector a = v.cwiseAbs();
  const double r2 = set.radius_l2;
  const double r1 = set.radius_l1;
  const double n2 = a.norm();
  const double n1 = a.sum();
  if (n2 <= r2 && n1 <= r1) return v;

  // Only the l2 constraint binds.
  if (n2 > r2) {
    const Vector u = a * (r2 / n2);
    if (u.sum() <= r1) return with_signs(u, v);
  }
  // Only the l1 constraint binds.
  if (n1 > r1) {
    const Vector u = shrink(a, l1_threshold(a, r1));
    if (u.norm() <= r2) return with_signs(u, v);
  }
  // Both bind: u = r2 * (a - tau)_+ / ||(a - tau)_+|| with l1 norm r1.
  const double tau = joint_threshold(a, r1 / r2);
  Vector u = shrink(a, tau);
  u *= r2 / u.norm();
  return with_signs(u, v);
}

Vector project_intersection(const Vector& v, int k) {
  return project_intersection(v, BallIntersection::for_cardinality(k));
}

Vector maximize_linear_over_intersection(const Vector& d, int k) {
  const Vector a = d.cwiseAbs();
  const double n2 = a.norm();
  if (n2 == 0.0) return Vector::Zero(d.size());
  const double r = std::sqrt(static_cast<double>(k));
  if (a.sum() <= r * n2) return d / n2;
  Vector u = shrink(a, joint_threshold(a, r));
  u /= u.norm();
  return with_signs(u, d);
}

L1Result l1_heuristic(const Matrix& a, int k, const Vector& x0, const L1HeuristicConfig& cfg) {
  L1Result best;
  Vector current = project_intersection(x0, k);
  Vector past = Vector::Zero(current.size());
  double obj = current.dot(a * current);
  double obj_past = 0.0;
  best.x = current;
  best.objective = obj;
  int iter = 0;
  while (obj > obj_past && (current - past).norm() > cfg.epsilon && iter < cfg.max_iters) {
    Vector y = a * current;
    const double ny = y.norm();
    if (ny == 0.0) break;
    // Small-scale matrices would otherwise shrink into the interior of the ball.
    if (ny < 1.0) y /= ny;
    past = current;
    obj_past = obj;
    current = project_intersection(y, k);
    obj = current.dot(a * current);
    ++iter;
    if (obj > best.objective) {
      best.x = current;
      best.objective = obj;
    }
  }
  best.iterations = iter;
  return best;
}

double theta_l0(const Vector& v, int k) {
  std::vector<double> sq(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) sq[i] = v(i) * v(i);
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), sq.size());
  std::partial_sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(kk), sq.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < kk; ++i) s += sq[i];
  return std::sqrt(s);
}

double theta_l1(const Vector& v, int k) {
  const double r = std::sqrt(static_cast<double>(k));
  const Vector a = v.cwiseAbs();
  auto dual = [&](double mu) { return shrink(a, mu).norm() + mu * r; };
  double lo = 0.0;
  double hi = a.maxCoeff();
  constexpr double inv_phi = 0.6180339887498949;
  double m1 = hi - inv_phi * (hi - lo);
  double m2 = lo + inv_phi * (hi - lo);
  double f1 = dual(m1);
  double f2 = dual(m2);
  while (hi - lo > 1e-12) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - inv_phi * (hi - lo);
      f1 = dual(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + inv_phi * (hi - lo);
      f2 = dual(m2);
    }
  }
  double best = std::min({dual(0.0), dual(a.maxCoeff()), dual(0.5 * (lo + hi))});
  return std::min(best, a.norm());
}

}  // namespace spca
