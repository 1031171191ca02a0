#include "spca/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "spca/errors.hpp"

namespace spca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeLayout {
  int num_linear = 0;
  std::vector<int> offset;  // first row of each SOC
  std::vector<int> dim;
  int rows = 0;

  explicit ConeLayout(const ConeProgram& p) : num_linear(p.num_linear), dim(p.soc_dims) {
    int r = num_linear;
    for (int d : dim) {
      offset.push_back(r);
      r += d;
    }
    rows = r;
  }
  int degree() const { return num_linear + static_cast<int>(dim.size()); }
};

double soc_residual(const Vector& u, int off, int d) {
  return u(off) - u.segment(off + 1, d - 1).norm();
}

// Jordan product u o v.
Vector jordan(const ConeLayout& L, const Vector& u, const Vector& v) {
  Vector r(u.size());
  r.head(L.num_linear) = u.head(L.num_linear).cwiseProduct(v.head(L.num_linear));
  for (std::size_t k = 0; k < L.dim.size(); ++k) {
    int o = L.offset[k], d = L.dim[k];
    r(o) = u.segment(o, d).dot(v.segment(o, d));
    r.segment(o + 1, d - 1) = u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
  }
  return r;
}

// Solves lambda o u = w for u.
Vector jordan_divide(const ConeLayout& L, const Vector& lam, const Vector& w) {
  Vector u(w.size());
  u.head(L.num_linear) = w.head(L.num_linear).cwiseQuotient(lam.head(L.num_linear));
  for (std::size_t k = 0; k < L.dim.size(); ++k) {
    int o = L.offset[k], d = L.dim[k];
    double l0 = lam(o);
    auto l1 = lam.segment(o + 1, d - 1);
    double det = l0 * l0 - l1.squaredNorm();
    double u0 = (l0 * w(o) - l1.dot(w.segment(o + 1, d - 1))) / det;
    u(o) = u0;
    u.segment(o + 1, d - 1) = (w.segment(o + 1, d - 1) - u0 * l1) / l0;
  }
  return u;
}

Vector identity_element(const ConeLayout& L) {
  Vector e = Vector::Zero(L.rows);
  e.head(L.num_linear).setOnes();
  for (int o : L.offset) e(o) = 1.0;
  return e;
}

// Largest alpha in [0, inf) with u + alpha du in the cone.
double max_step(const ConeLayout& L, const Vector& u, const Vector& du) {
  double alpha = kInf;
  for (int i = 0; i < L.num_linear; ++i)
    if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
  for (std::size_t k = 0; k < L.dim.size(); ++k) {
    int o = L.offset[k], d = L.dim[k];
    auto u1 = u.segment(o + 1, d - 1);
    auto d1 = du.segment(o + 1, d - 1);
    double qa = du(o) * du(o) - d1.squaredNorm();
    double qb = 2.0 * (u(o) * du(o) - u1.dot(d1));
    double qc = u(o) * u(o) - u1.squaredNorm();
    if (du(o) < 0.0) alpha = std::min(alpha, -u(o) / du(o));
    // Smallest positive root of qa t^2 + qb t + qc (qc > 0 inside the cone).
    double root = kInf;
    if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) root = -qc / qb;
    } else {
      double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        double r1 = q / qa;
        double r2 = q != 0.0 ? qc / q : kInf;
        for (double r : {r1, r2})
          if (r > 0.0) root = std::min(root, r);
      }
    }
    alpha = std::min(alpha, root);
  }
  return alpha;
}

// sqrt(u0^2 - |u1|^2), factored to avoid cancellation near the boundary.
double cone_norm(const Vector& u) {
  const double t = u.tail(u.size() - 1).norm();
  return std::sqrt(std::max((u(0) - t) * (u(0) + t), 1e-300));
}

// Nesterov-Todd scaling W, symmetric, with W z = W^{-1} s = lambda.
struct Scaling {
  const ConeLayout* L;
  Vector w;  // linear part
  std::vector<double> eta;
  std::vector<Vector> wbar;  // unit hyperbolic scaling point per SOC

  void identity(const ConeLayout& layout) {
    L = &layout;
    w = Vector::Ones(L->num_linear);
    eta.assign(L->dim.size(), 1.0);
    wbar.clear();
    for (int d : L->dim) {
      Vector e = Vector::Zero(d);
      e(0) = 1.0;
      wbar.push_back(e);
    }
  }

  void compute(const ConeLayout& layout, const Vector& s, const Vector& z) {
    L = &layout;
    w = (s.head(L->num_linear).cwiseQuotient(z.head(L->num_linear))).cwiseSqrt();
    eta.resize(L->dim.size());
    wbar.resize(L->dim.size());
    for (std::size_t k = 0; k < L->dim.size(); ++k) {
      int o = L->offset[k], d = L->dim[k];
      Vector sk = s.segment(o, d), zk = z.segment(o, d);
      double sn = cone_norm(sk), zn = cone_norm(zk);
      Vector sb = sk / sn, zb = zk / zn;
      double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
      Vector wb = sb;
      wb(0) += zb(0);
      wb.tail(d - 1) -= zb.tail(d - 1);
      wb /= 2.0 * gamma;
      eta[k] = std::sqrt(sn / zn);
      wbar[k] = wb;
    }
  }

  // H(v) v for a hyperbolic point v = (a; q).
  static Vector hyper(const Vector& v, double sign_q, const Eigen::Ref<const Vector>& x) {
    const int d = static_cast<int>(v.size());
    double a = v(0);
    Vector q = sign_q * v.tail(d - 1);
    Vector r(d);
    double qx = q.dot(x.tail(d - 1));
    r(0) = a * x(0) + qx;
    r.tail(d - 1) = x(0) * q + x.tail(d - 1) + (qx / (1.0 + a)) * q;
    return r;
  }

  Vector apply(const Vector& x) const {
    Vector r(x.size());
    r.head(L->num_linear) = w.cwiseProduct(x.head(L->num_linear));
    for (std::size_t k = 0; k < L->dim.size(); ++k)
      r.segment(L->offset[k], L->dim[k]) = eta[k] * hyper(wbar[k], 1.0, x.segment(L->offset[k], L->dim[k]));
    return r;
  }

  Vector apply_inverse(const Vector& x) const {
    Vector r(x.size());
    r.head(L->num_linear) = x.head(L->num_linear).cwiseQuotient(w);
    for (std::size_t k = 0; k < L->dim.size(); ++k)
      r.segment(L->offset[k], L->dim[k]) = hyper(wbar[k], -1.0, x.segment(L->offset[k], L->dim[k])) / eta[k];
    return r;
  }

  Vector apply_inverse_sq(const Vector& x) const { return apply_inverse(apply_inverse(x)); }
};

class KktSolver {
 public:
  KktSolver(const ConeProgram& p, const ConeLayout& L) : p_(p), L_(L) {
    g_lin_ = p.g.topRows(L.num_linear);
    for (std::size_t k = 0; k < L.dim.size(); ++k) {
      SparseMatrix gk = p.g.middleRows(L.offset[k], L.dim[k]);
      Matrix dense(gk);
      Matrix jg = dense;
      jg.bottomRows(L.dim[k] - 1) *= -1.0;
      cones_.push_back({Eigen::SparseMatrix<double>(gk.transpose()), dense.transpose() * jg});
    }
    at_ = p.a.transpose();
  }

  void factor(const Scaling& w) {
    const int nv = p_.num_vars();
    w_ = &w;
    // Linear rows in Gram form; each cone adds (2 p p^T - G^T J G) / eta^2 with p = G^T J wbar.
    Matrix h = Matrix::Zero(nv, nv);
    for (int r = 0; r < g_lin_.outerSize(); ++r) {
      const double s = 1.0 / (w.w(r) * w.w(r));
      for (SparseMatrix::InnerIterator a(g_lin_, r); a; ++a)
        for (SparseMatrix::InnerIterator b(g_lin_, r); b; ++b) h(a.col(), b.col()) += s * a.value() * b.value();
    }
    for (std::size_t k = 0; k < cones_.size(); ++k) {
      Vector u = w.wbar[k];
      u.tail(u.size() - 1) *= -1.0;
      const Vector p = cones_[k].gt * u;
      const double s = 1.0 / (w.eta[k] * w.eta[k]);
      h.noalias() += (2.0 * s) * p * p.transpose();
      h.noalias() -= s * cones_[k].gtjg;
    }
    // Diagonal-relative shift: Cholesky is invariant under diagonal scaling, so
    // this perturbs every direction by the same relative amount.
    const Vector diag = h.diagonal().cwiseMax(1e-300);
    double reg = 1e-14;
    h_ = h;
    h_.diagonal() += reg * diag + Vector::Constant(nv, 1e-300);
    llt_.compute(h_);
    while (llt_.info() != Eigen::Success) {
      reg *= 100.0;
      if (reg > 1e-2) throw NumericalError("KKT factorization failed", reg);
      h_ = h;
      h_.diagonal() += reg * diag + Vector::Constant(nv, 1e-12);
      llt_.compute(h_);
    }
    if (p_.a.rows() > 0) {
      hinv_at_ = llt_.solve(Matrix(at_));
      Matrix schur = Matrix(p_.a * hinv_at_);
      schur.diagonal() += 1e-14 * schur.diagonal().cwiseAbs();
      schur_.compute(schur);
    }
  }

  // [0 A^T G^T; A 0 0; G 0 -W^2] (dx, dy, dz) = (bx, by, bz)
  void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy, Vector& dz) const {
    solve_once(bx, by, bz, dx, dy, dz);
    for (int it = 0; it < 2; ++it) {
      Vector rx = bx - (at_ * dy + p_.g.transpose() * dz);
      Vector ry = by - p_.a * dx;
      Vector rz = bz - (p_.g * dx - w_->apply(w_->apply(dz)));
      double err = std::max({rx.lpNorm<Eigen::Infinity>(), ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                             rz.lpNorm<Eigen::Infinity>()});
      if (err < 1e-14) break;
      Vector ex, ey, ez;
      solve_once(rx, ry, rz, ex, ey, ez);
      dx += ex;
      dy += ey;
      dz += ez;
    }
  }

 private:
  void solve_once(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy, Vector& dz) const {
    Vector rhs = bx + p_.g.transpose() * w_->apply_inverse_sq(bz);
    if (p_.a.rows() > 0) {
      Vector hr = llt_.solve(rhs);
      dy = schur_.solve(p_.a * hr - by);
      dx = llt_.solve(rhs - at_ * dy);
    } else {
      dy = Vector(0);
      dx = llt_.solve(rhs);
    }
    dz = w_->apply_inverse_sq(p_.g * dx - bz);
  }

  const ConeProgram& p_;
  const ConeLayout& L_;
  SparseMatrix g_lin_;
  Eigen::SparseMatrix<double> at_;
  struct ConeBlock {
    Eigen::SparseMatrix<double> gt;
    Matrix gtjg;  // G^T J G
  };
  std::vector<ConeBlock> cones_;
  const Scaling* w_ = nullptr;
  Matrix h_;
  Eigen::LLT<Matrix> llt_;
  Matrix hinv_at_;
  Eigen::LDLT<Matrix> schur_;
};

// Pushes u into the interior: u + (1 + alpha) e when u is not strictly inside.
void shift_into_cone(const ConeLayout& L, Vector& u) {
  double alpha = -kInf;
  for (int i = 0; i < L.num_linear; ++i) alpha = std::max(alpha, -u(i));
  for (std::size_t k = 0; k < L.dim.size(); ++k) alpha = std::max(alpha, -soc_residual(u, L.offset[k], L.dim[k]));
  if (alpha >= -1e-8) {
    Vector e = identity_element(L);
    u += (1.0 + std::max(alpha, 0.0)) * e;
  }
}

}  // namespace

void ConeProgram::validate() const {
  const int nv = num_vars();
  if (a.cols() != nv || g.cols() != nv) throw ValidationError("cone program: column count mismatch");
  if (a.rows() != b.size() || g.rows() != h.size()) throw ValidationError("cone program: row count mismatch");
  int rows = num_linear;
  for (int d : soc_dims) {
    if (d < 2) throw ValidationError("cone program: second-order cone needs dimension >= 2");
    rows += d;
  }
  if (rows != g.rows()) throw ValidationError("cone program: cone dimensions do not cover G");
  if (lower.size() != nv || upper.size() != nv) throw ValidationError("cone program: box size mismatch");
}

double dual_certificate(const ConeProgram& prog, const Vector& y, const Vector& w_in) {
  ConeLayout L(prog);
  Vector w = w_in;
  for (int i = 0; i < L.num_linear; ++i) w(i) = std::max(w(i), 0.0);
  for (std::size_t k = 0; k < L.dim.size(); ++k) {
    int o = L.offset[k];
    double tn = w.segment(o + 1, L.dim[k] - 1).norm();
    if (w(o) < tn) w(o) = tn;
  }
  Vector r = prog.c - prog.a.transpose() * y - prog.g.transpose() * w;
  double bound = prog.b.dot(y) + prog.h.dot(w);
  double magnitude = std::abs(prog.b.dot(y)) + std::abs(prog.h.dot(w));
  for (int j = 0; j < prog.num_vars(); ++j) {
    if (r(j) == 0.0) continue;
    double box = r(j) > 0.0 ? prog.upper(j) : prog.lower(j);
    if (!std::isfinite(box)) return kInf;
    bound += r(j) * box;
    magnitude += std::abs(r(j) * box);
  }
  // Round-off allowance on the accumulated sums.
  return bound + 1e-13 * (1.0 + magnitude);
}

ConeSolution solve_cone_program(const ConeProgram& prog, const ConeSolverOptions& opts) {
  prog.validate();
  const ConeLayout L(prog);
  const int nv = prog.num_vars();
  const int m = L.degree();
  const Vector c = -prog.c;  // internal form is a minimization

  KktSolver kkt(prog, L);
  Scaling scaling;
  scaling.identity(L);
  kkt.factor(scaling);

  Vector x, y, z, s, tmp;
  // Primal start: least-squares slack.
  kkt.solve(Vector::Zero(nv), prog.b, prog.h, x, y, tmp);
  s = -tmp;
  shift_into_cone(L, s);
  // Dual start: least-norm dual multipliers.
  Vector xd;
  kkt.solve(-c, Vector::Zero(prog.b.size()), Vector::Zero(L.rows), xd, y, z);
  shift_into_cone(L, z);

  ConeSolution best;
  best.certified_bound = kInf;
  best.z = x;
  best.primal_value = prog.c.dot(x);
  best.primal_residual = kInf;

  const double bnorm = 1.0 + prog.b.norm();
  const double hnorm = 1.0 + prog.h.norm();
  const Vector e = identity_element(L);
  int stalls = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Vector rx = prog.a.transpose() * y + prog.g.transpose() * z + c;
    Vector ry = prog.a * x - prog.b;
    Vector rz = prog.g * x + s - prog.h;
    double pres = std::max(ry.size() ? ry.norm() / bnorm : 0.0, rz.norm() / hnorm);
    double mu = s.dot(z) / m;
    double pval = prog.c.dot(x);

    double cert = dual_certificate(prog, y, z);
    if (cert < best.certified_bound) best.certified_bound = cert;
    if (pres <= best.primal_residual * 1.0000001 || pres <= 1e-9) {
      best.z = x;
      best.primal_value = pval;
      best.primal_residual = pres;
    }
    best.iterations = iter;
    spdlog::trace("ipm {}: pres={:.2e} dres={:.2e} mu={:.2e} pval={:.10f} cert={:.10f}", iter, pres, rx.norm(), mu,
                  pval, cert);
    double scale = 1.0 + std::abs(pval);
    if (pres <= opts.tolerance && best.certified_bound - pval <= opts.tolerance * scale) {
      best.status = ConeStatus::Optimal;
      return best;
    }
    if (mu <= 1e-15 * scale) break;

    scaling.compute(L, s, z);
    kkt.factor(scaling);
    Vector lam = scaling.apply(z);

    // Predictor.
    Vector rhs_c = -jordan(L, lam, lam);
    Vector ds_hat = jordan_divide(L, lam, rhs_c);
    Vector dx, dy, dz;
    kkt.solve(-rx, -ry, -rz - scaling.apply(ds_hat), dx, dy, dz);
    Vector ds = scaling.apply(ds_hat - scaling.apply(dz));
    double a_aff = std::min({1.0, max_step(L, s, ds), max_step(L, z, dz)});
    double sigma = std::pow(std::max(0.0, (s + a_aff * ds).dot(z + a_aff * dz)) / s.dot(z), 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    rhs_c -= jordan(L, scaling.apply_inverse(ds), scaling.apply(dz));
    rhs_c += sigma * mu * e;
    ds_hat = jordan_divide(L, lam, rhs_c);
    kkt.solve(-rx, -ry, -rz - scaling.apply(ds_hat), dx, dy, dz);
    ds = scaling.apply(ds_hat - scaling.apply(dz));
    double alpha = std::min(1.0, 0.99 * std::min(max_step(L, s, ds), max_step(L, z, dz)));
    if (!(alpha > 1e-10)) {
      if (++stalls > 2) break;
      alpha = 1e-10;
    }

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    if (!x.allFinite() || !z.allFinite() || !s.allFinite()) break;
  }

  if (!std::isfinite(best.certified_bound)) {
    best.status = ConeStatus::Failed;
  } else {
    const double gap = best.certified_bound - best.primal_value;
    const bool reduced = best.primal_residual <= opts.acceptable_tolerance &&
                         gap <= opts.acceptable_tolerance * (1.0 + std::abs(best.primal_value));
    best.status = reduced ? ConeStatus::Optimal : ConeStatus::Inaccurate;
  }
  return best;
}

}  // namespace spca
