#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

using LinearMap = std::function<void(const Vector& in, Vector& out)>;

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;  // final relative residual ||b - Ax|| / ||b||
};

struct SpdOptions {
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 n + 100
  /// Interleaved vector components whose constant mode spans the kernel of A.
  /// When > 0, the rhs and the iterates are kept orthogonal to those constants.
  int project_constants = 0;
};

namespace detail {

/// Remove the per-component mean of an interleaved vector.
inline void project_out_constants(Vector& x, int components) {
  if (components <= 0) return;
  const Index n = x.size() / components;
  for (int c = 0; c < components; ++c) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += x(i * components + c);
    s /= static_cast<double>(n);
    for (Index i = 0; i < n; ++i) x(i * components + c) -= s;
  }
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for symmetric positive (semi-)definite A.
inline Vector solve_spd(const SparseMatrix& a, const Vector& b, const SpdOptions& opt = {},
                        SolveInfo* info = nullptr, const Vector* x0 = nullptr) {
  const Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw ShapeError("solve_spd: dimension mismatch");
  Vector rhs = b;
  detail::project_out_constants(rhs, opt.project_constants);
  Vector x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (info) *info = {0, 0.0};
    return Vector::Zero(n);
  }
  Vector dinv = a.diagonal();
  for (Index i = 0; i < n; ++i) dinv(i) = dinv(i) > 0.0 ? 1.0 / dinv(i) : 1.0;
  Vector r = rhs - a * x;
  Vector z = dinv.cwiseProduct(r);
  detail::project_out_constants(z, opt.project_constants);
  Vector p = z, ap(n);
  double rz = r.dot(z);
  const int max_it = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * n + 100);
  double rel = r.norm() / bnorm;
  int it = 0;
  while (rel > opt.tolerance && it < max_it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++it;
    // recompute the true residual now and then to avoid drift
    if (it % 50 == 0) r = rhs - a * x;
    rel = r.norm() / bnorm;
    z = dinv.cwiseProduct(r);
    detail::project_out_constants(z, opt.project_constants);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rel = (rhs - a * x).norm() / bnorm;
  detail::project_out_constants(x, opt.project_constants);
  if (info) *info = {it, rel};
  if (!(rel <= opt.tolerance)) throw SolverDiverged("solve_spd: conjugate gradients stagnated", it, rel);
  return x;
}

/// Sparse LDL^T factorization packaged as a preconditioner. A small diagonal
/// shift keeps semidefinite blocks factorizable.
inline LinearMap ldlt_inverse(const SparseMatrix& a, double relative_shift = 0.0) {
  using Col = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  Col m = a;
  if (relative_shift > 0.0) {
    const double d = a.diagonal().cwiseAbs().mean();
    for (Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += relative_shift * d;
  }
  auto solver = std::make_shared<Eigen::SimplicialLDLT<Col>>(m);
  if (solver->info() != Eigen::Success)
    throw SolverDiverged("ldlt_inverse: factorization failed", 0, 0.0);
  return [solver](const Vector& in, Vector& out) { out = solver->solve(in); };
}

inline LinearMap diagonal_inverse(const Vector& d) {
  Vector inv = d;
  for (Index i = 0; i < inv.size(); ++i) inv(i) = d(i) != 0.0 ? 1.0 / d(i) : 0.0;
  return [inv](const Vector& in, Vector& out) { out = inv.cwiseProduct(in); };
}

/// Block-diagonal preconditioner for [[A, B^T], [B, -S]].
struct SaddlePreconditioner {
  LinearMap velocity;
  LinearMap pressure;
};

/// Steady Stokes: velocity block inverted exactly, pressure by (Mp / nu + S)^{-1}.
inline SaddlePreconditioner stokes_preconditioner(const SparseMatrix& a, const SparseMatrix& mp,
                                                  const SparseMatrix& s, double nu) {
  SparseMatrix p = mp / nu + s;
  return {ldlt_inverse(a), ldlt_inverse(p, 1e-12)};
}

/// Time-dependent blocks A = M + k K: Cahouet-Chabard style pressure preconditioner
///   (B diag(M)^{-1} B^T + S)^{-1} + nu_eff diag(Mp)^{-1}.
inline SaddlePreconditioner cahouet_chabard_preconditioner(const SparseMatrix& a,
                                                           const SparseMatrix& b,
                                                           const Vector& mass_diagonal,
                                                           const SparseMatrix& s,
                                                           const SparseMatrix& mp, double nu_eff) {
  Vector dinv = mass_diagonal;
  for (Index i = 0; i < dinv.size(); ++i) dinv(i) = dinv(i) > 0.0 ? 1.0 / dinv(i) : 0.0;
  SparseMatrix bt = b.transpose();
  SparseMatrix lp = b * dinv.asDiagonal() * bt;
  SparseMatrix sp = lp + s;
  auto lap_inv = ldlt_inverse(sp, 1e-10);
  Vector mpd = mp.diagonal();
  auto mass_inv = diagonal_inverse(mpd);
  LinearMap pressure = [lap_inv, mass_inv, nu_eff](const Vector& in, Vector& out) {
    Vector t;
    lap_inv(in, out);
    mass_inv(in, t);
    out += nu_eff * t;
  };
  return {ldlt_inverse(a), pressure};
}

struct SaddleOptions {
  double tolerance = 1e-8;
  int max_iterations = 5000;
  /// Weights w with sum_i w_i p_i = fluid-phase integral of p; the returned
  /// pressure has zero weighted mean. Empty: no normalization.
  Vector pressure_weights;
  /// The constant pressure lies in the kernel of the system.
  bool pressure_kernel = true;
};

struct SaddleSolution {
  Vector velocity;
  Vector pressure;
  SolveInfo info;
};

/// Preconditioned MINRES for [[A, B^T], [B, -S]] (u, p) = (f, g).
inline SaddleSolution solve_saddle(const SparseMatrix& a, const SparseMatrix& b,
                                   const SparseMatrix& s, const Vector& f, const Vector& g,
                                   const SaddlePreconditioner& prec, const SaddleOptions& opt = {},
                                   const SaddleSolution* guess = nullptr) {
  const Index nu = a.rows(), np = s.rows();
  if (a.cols() != nu || b.rows() != np || b.cols() != nu || s.cols() != np || f.size() != nu ||
      g.size() != np)
    throw ShapeError("solve_saddle: blocks are not conformant");
  const SparseMatrix bt = b.transpose();
  auto project = [&](Vector& p) {
    if (opt.pressure_kernel && np > 0) p.array() -= p.mean();
  };
  auto apply = [&](const Vector& x, Vector& y) {
    y.resize(nu + np);
    y.head(nu).noalias() = a * x.head(nu);
    y.head(nu).noalias() += bt * x.tail(np);
    y.tail(np).noalias() = b * x.head(nu);
    y.tail(np).noalias() -= s * x.tail(np);
  };
  auto precondition = [&](const Vector& r, Vector& z) {
    z.resize(nu + np);
    Vector zu, zp, rp = r.tail(np);
    project(rp);
    prec.velocity(r.head(nu), zu);
    prec.pressure(rp, zp);
    project(zp);
    z.head(nu) = zu;
    z.tail(np) = zp;
  };

  Vector rhs(nu + np);
  rhs.head(nu) = f;
  rhs.tail(np) = g;
  {
    Vector gp = rhs.tail(np);
    project(gp);
    rhs.tail(np) = gp;
  }
  const double bnorm = rhs.norm();
  SaddleSolution out;
  out.velocity = Vector::Zero(nu);
  out.pressure = Vector::Zero(np);
  if (bnorm == 0.0) return out;

  Vector x = Vector::Zero(nu + np);
  if (guess && guess->velocity.size() == nu && guess->pressure.size() == np) {
    x.head(nu) = guess->velocity;
    x.tail(np) = guess->pressure;
  }
  Vector ax;
  apply(x, ax);
  Vector r0 = rhs - ax;
  double true_rel = r0.norm() / bnorm;
  int total_it = 0;

  // restarted only when the short recurrence drifts from the true residual
  while (true_rel > opt.tolerance && total_it < opt.max_iterations) {
    Vector r1 = r0, y, r2 = r0, v, w = Vector::Zero(nu + np), w1, w2 = Vector::Zero(nu + np);
    precondition(r1, y);
    double beta1 = r1.dot(y);
    if (!(beta1 > 0.0)) break;
    beta1 = std::sqrt(beta1);
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    Vector dx = Vector::Zero(nu + np);
    int it = 0;
    while (total_it < opt.max_iterations) {
      ++it;
      ++total_it;
      v = y / beta;
      apply(v, y);
      if (it >= 2) y -= (beta / oldb) * r1;
      const double alfa = v.dot(y);
      y -= (alfa / beta) * r2;
      r1 = r2;
      r2 = y;
      precondition(r2, y);
      oldb = beta;
      const double bb = r2.dot(y);
      beta = bb > 0.0 ? std::sqrt(bb) : 0.0;
      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;
      w1 = w2;
      w2 = w;
      w = (v - oldeps * w1 - delta * w2) / gamma;
      dx += phi * w;
      if (phibar <= 0.1 * opt.tolerance * beta1 || beta == 0.0) break;
    }
    x += dx;
    apply(x, ax);
    r0 = rhs - ax;
    const double rel = r0.norm() / bnorm;
    if (!(rel < true_rel)) {
      true_rel = rel;
      break;
    }
    true_rel = rel;
  }
  out.velocity = x.head(nu);
  out.pressure = x.tail(np);
  if (opt.pressure_weights.size() == np && np > 0) {
    const double wsum = opt.pressure_weights.sum();
    if (wsum > 0.0) out.pressure.array() -= opt.pressure_weights.dot(out.pressure) / wsum;
  }
  out.info = {total_it, true_rel};
  if (!(true_rel <= opt.tolerance))
    throw SolverDiverged("solve_saddle: MINRES did not reach the tolerance", total_it, true_rel);
  return out;
}

/// Restarted GMRES with right preconditioning for nonsymmetric systems.
inline Vector gmres(const LinearMap& apply, const Vector& b, const LinearMap& precondition,
                    double tolerance, int restart = 60, int max_iterations = 5000,
                    SolveInfo* info = nullptr, const Vector* x0 = nullptr) {
  const Index n = b.size();
  Vector x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (info) *info = {0, 0.0};
    return Vector::Zero(n);
  }
  Vector ax(n);
  apply(x, ax);
  Vector r = b - ax;
  double rel = r.norm() / bnorm;
  int total = 0;
  while (rel > tolerance && total < max_iterations) {
    const int m = restart;
    std::vector<Vector> vbasis, zbasis;
    Matrix h = Matrix::Zero(m + 1, m);
    Vector cs = Vector::Zero(m), sn = Vector::Zero(m), e = Vector::Zero(m + 1);
    const double beta = r.norm();
    e(0) = beta;
    vbasis.push_back(r / beta);
    int k = 0;
    while (k < m && total < max_iterations) {
      Vector z, wv;
      precondition(vbasis[k], z);
      apply(z, wv);
      zbasis.push_back(z);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = wv.dot(vbasis[i]);
        wv -= h(i, k) * vbasis[i];
      }
      const double hnext = wv.norm();
      h(k + 1, k) = hnext;
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
        h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
        h(i, k) = t;
      }
      const double d = std::hypot(h(k, k), h(k + 1, k));
      cs(k) = h(k, k) / d;
      sn(k) = h(k + 1, k) / d;
      h(k, k) = d;
      h(k + 1, k) = 0.0;
      e(k + 1) = -sn(k) * e(k);
      e(k) = cs(k) * e(k);
      ++k;
      ++total;
      if (std::abs(e(k)) <= 0.1 * tolerance * bnorm || hnext == 0.0) break;
      vbasis.push_back(wv / hnext);
    }
    const int kk = std::min<int>(k, static_cast<int>(zbasis.size()));
    Vector yv = h.topLeftCorner(kk, kk).triangularView<Eigen::Upper>().solve(e.head(kk));
    for (int i = 0; i < kk; ++i) x += yv(i) * zbasis[i];
    apply(x, ax);
    r = b - ax;
    const double new_rel = r.norm() / bnorm;
    if (!(new_rel < rel)) {
      rel = new_rel;
      break;
    }
    rel = new_rel;
  }
  if (info) *info = {total, rel};
  if (!(rel <= tolerance)) throw SolverDiverged("gmres: did not reach the tolerance", total, rel);
  return x;
}

}  // namespace aphom
