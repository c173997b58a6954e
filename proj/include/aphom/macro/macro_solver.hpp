#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include <Eigen/SparseLU>

#include "aphom/fem/assembly.hpp"
#include "aphom/fem/krylov.hpp"
#include "aphom/homogenizer/homogenizer.hpp"

namespace aphom {

/// Nodal load x, t -> R^N.
using LoadField = std::function<Vector(const Point&, double)>;

inline LoadField zero_load(int dim) {
  return [dim](const Point&, double) { return Vector(Vector::Zero(dim)); };
}

struct MacroState {
  Vector u;         // free displacement unknowns
  Vector v;         // free velocity unknowns
  Vector a;         // (v_{n} - v_{n-1}) / dt
  Vector pressure;  // midpoint pressure of the last step, all nodes
  Index step = 0;
  double dt = 0.0;
  double time() const { return static_cast<double>(step) * dt; }
};

struct MacroOptions {
  /// Enforce div du0/dt = 0 through a macroscopic pressure. Default: when the
  /// model has a fluid phase and N > 1.
  int incompressible = -1;
  double stabilization = 0.1;
  double tolerance = 1e-12;
};

/// Weak operators of  rho0 u'' - div(C0 grad u + C1 grad u') + grad h(grad u') [+ grad p0] = F
/// on the free (interior) nodes of a mesh with u = 0 on the boundary.
struct MacroOperators {
  const BoxMesh* mesh = nullptr;
  int dim = 0;
  DofMap dofs;
  SparseMatrix M;       // rho0 * mass
  SparseMatrix K;       // C0 stiffness
  SparseMatrix D;       // C1 damping
  SparseMatrix P;       // h coupling: -int (H : grad v) div psi
  SparseMatrix Munit;   // unit-density vector mass on free rows, all columns
  bool incompressible = false;
  SparseMatrix B;       // -int q div v, all nodes x free unknowns
  SparseMatrix L;       // scalar Laplacian on all nodes (pressure stabilization)
  Vector pressure_weights;
  double stabilization = 0.1;
  double rho0 = 0.0;
  double weight_f = 0.0, weight_g = 0.0;
  double viscosity_scale = 0.0, stiffness_scale = 0.0;
  double tolerance = 1e-12;

  bool symmetric() const { return P.nonZeros() == 0; }
  Index size() const { return dofs.size(); }
};

/// Operator coefficient -delta_kl H_mn for the h-coupling.
inline Matrix h_coupling_tensor(const Vector& H, int dim) {
  Matrix t = Matrix::Zero(dim * dim, dim * dim);
  for (int k = 0; k < dim; ++k) t.row(k * dim + k) = -H.transpose();
  return t;
}

inline MacroOperators assemble_macro_system(const EffectiveModel& model, const BoxMesh& mesh,
                                            const MacroOptions& opt = {}) {
  const int dim = model.dimension;
  if (mesh.dimension() != dim) throw GridMismatch("assemble_macro_system: mesh and model dimensions differ");
  if (mesh.periodic()) throw GridMismatch("assemble_macro_system: the macro mesh must carry a boundary");
  MacroOperators op;
  op.mesh = &mesh;
  op.dim = dim;
  op.dofs = DofMap(mesh.num_nodes(), dim, boundary_nodes(mesh));
  op.rho0 = model.rho0;
  op.weight_f = model.weight_f;
  op.weight_g = model.weight_g;
  op.stabilization = opt.stabilization;
  op.tolerance = opt.tolerance;
  const CellMask all = full_mask(mesh);
  const SparseMatrix mass = lift_to_vector(assemble_scalar_mass_full(mesh, [](Index) { return 1.0; }, all), dim);
  op.Munit = op.dofs.reduce(mass, DofMap::unconstrained(mesh.num_nodes(), dim));
  op.M = model.rho0 * op.dofs.reduce(mass);
  op.K = op.dofs.reduce(assemble_vector_elliptic_full(mesh, [&](Index) { return model.C0; }, all, false));
  op.D = op.dofs.reduce(assemble_vector_elliptic_full(mesh, [&](Index) { return model.C1; }, all, false));
  const Matrix ht = h_coupling_tensor(model.H, dim);
  op.P = op.dofs.reduce(assemble_vector_elliptic_full(mesh, [&](Index) { return ht; }, all, false));
  op.P.prune(0.0);
  op.viscosity_scale = model.C1.trace() / static_cast<double>(dim * dim);
  op.stiffness_scale = model.C0.trace() / static_cast<double>(dim * dim);
  op.incompressible = opt.incompressible < 0 ? (dim > 1 && !model.stokes.empty()) : opt.incompressible != 0;
  if (op.incompressible) {
    op.B = DofMap::unconstrained(mesh.num_nodes(), 1).reduce(assemble_divergence_full(mesh, all), op.dofs);
    op.L = assemble_scalar_laplacian_full(mesh, [](Index) { return 1.0; }, all);
    op.pressure_weights = assemble_basis_integrals(mesh, all);
  }
  return op;
}

/// Nodal load vector  int F . psi  with F = M(chi1 rho1) f + M(chi2 rho2) g at time t.
inline Vector macro_load(const MacroOperators& op, const LoadField& f, const LoadField& g, double t) {
  const BoxMesh& mesh = *op.mesh;
  Vector nodal(mesh.num_nodes() * op.dim);
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const Point x = mesh.node_coordinates(n);
    nodal.segment(n * op.dim, op.dim) = op.weight_f * f(x, t) + op.weight_g * g(x, t);
  }
  return op.Munit * nodal;
}

/// Trapezoidal (Newmark beta = 1/4, gamma = 1/2) stepper. Each step solves
///   (M + dt/2 (D + P) + dt^2/4 K) v_{n+1} + B^T q = dt rhs,   B v_bar - S q = 0
/// for the new velocity and q = dt p_bar, with a fixed matrix factorized once.
class MacroStepper {
 public:
  MacroStepper(const MacroOperators& op, double dt) : op_(&op), dt_(dt) {
    if (!(dt > 0.0)) throw SolverDiverged("MacroStepper: time step must be positive", 0, 0.0);
    lhs_ = op.M + (0.5 * dt) * (op.D + op.P) + (0.25 * dt * dt) * op.K;
    lhs_.makeCompressed();
    if (op.incompressible) build_saddle();
  }

  double dt() const { return dt_; }

  MacroState initial_state() const {
    MacroState s;
    s.u = Vector::Zero(op_->size());
    s.v = Vector::Zero(op_->size());
    s.a = Vector::Zero(op_->size());
    s.pressure = Vector::Zero(op_->incompressible ? op_->mesh->num_nodes() : 0);
    s.dt = dt_;
    return s;
  }

  /// One step with load vectors at t_n and t_{n+1}.
  MacroState step(const MacroState& s, const Vector& load_n, const Vector& load_np1,
                  SolveInfo* info = nullptr) const {
    const MacroOperators& op = *op_;
    const double dt = dt_;
    const Vector fbar = 0.5 * (load_n + load_np1);
    Vector rhs = dt * fbar + op.M * s.v - (0.5 * dt) * ((op.D + op.P) * s.v) -
                 dt * (op.K * s.u) - (0.25 * dt * dt) * (op.K * s.v);
    MacroState next = s;
    if (op.incompressible) {
      const Index nv = op.size();
      Vector b(saddle_.rows());
      b.head(nv) = rhs;
      // B v_{n+1} - 2 S q = -B v_n
      const Vector bv = op.B * s.v;
      b.tail(saddle_.rows() - nv) = -restrict_pressure(bv);
      const Vector x = lu_->solve(b);
      if (lu_->info() != Eigen::Success) throw SolverDiverged("MacroStepper: saddle solve failed", 0, 0.0);
      next.v = x.head(nv);
      Vector q = expand_pressure(x.tail(saddle_.rows() - nv));
      remove_weighted_mean(q, op.pressure_weights);
      next.pressure = q / dt;
      if (info) {
        const double r = (saddle_ * x - b).norm() / std::max(b.norm(), 1e-300);
        *info = SolveInfo{1, r};
      }
    } else if (op.symmetric()) {
      SpdOptions so;
      so.tolerance = op.tolerance;
      next.v = solve_spd(lhs_, rhs, so, info, &s.v);
    } else {
      const Vector diag = lhs_.diagonal();
      next.v = gmres([&](const Vector& x, Vector& y) { y = lhs_ * x; }, rhs,
                     [&](const Vector& x, Vector& y) { y = x.cwiseQuotient(diag); }, op.tolerance, 60, 5000,
                     info, &s.v);
    }
    next.u = s.u + (0.5 * dt) * (s.v + next.v);
    next.a = (next.v - s.v) / dt;
    next.step = s.step + 1;
    next.dt = dt;
    return next;
  }

  /// Dissipation of one step: dt (v_bar.(D + P) v_bar + q.S q / dt^2).
  double step_dissipation(const MacroState& s, const MacroState& next) const {
    const MacroOperators& op = *op_;
    const Vector vb = 0.5 * (s.v + next.v);
    double d = dt_ * vb.dot((op.D + op.P) * vb);
    // p_bar . B v_bar = q.S q / dt >= 0
    if (op.incompressible) d += dt_ * next.pressure.dot(op.B * vb);
    return d;
  }

 private:
  void build_saddle() {
    const MacroOperators& op = *op_;
    const BoxMesh& mesh = *op.mesh;
    double h = 0.0;
    for (int i = 0; i < mesh.dimension(); ++i) h = std::max(h, mesh.spacing(i));
    // stabilization scaled with the effective coefficient of the step matrix
    const double alpha = op.rho0 * h * h + 0.5 * dt_ * op.viscosity_scale + 0.25 * dt_ * dt_ * op.stiffness_scale;
    const double s = op.stabilization * h * h / alpha;
    // the pressure constant is in the kernel of both B^T and S: pin node 0
    const Index np = mesh.num_nodes() - 1;
    const Index nv = op.size();
    std::vector<Triplet> t;
    for (int k = 0; k < lhs_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(lhs_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < op.B.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(op.B, k); it; ++it) {
        if (it.row() == 0) continue;
        const int p = static_cast<int>(nv + it.row() - 1);
        t.emplace_back(p, it.col(), it.value());
        t.emplace_back(it.col(), p, it.value());
      }
    for (int k = 0; k < op.L.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(op.L, k); it; ++it) {
        if (it.row() == 0 || it.col() == 0) continue;
        t.emplace_back(static_cast<int>(nv + it.row() - 1), static_cast<int>(nv + it.col() - 1), -2.0 * s * it.value());
      }
    saddle_.resize(nv + np, nv + np);
    saddle_.setFromTriplets(t.begin(), t.end());
    saddle_.makeCompressed();
    colmajor_ = saddle_;
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(colmajor_);
    if (lu_->info() != Eigen::Success)
      throw SolverDiverged("MacroStepper: factorization of the saddle matrix failed", 0, 0.0);
  }

  Vector restrict_pressure(const Vector& full) const { return full.tail(full.size() - 1); }
  Vector expand_pressure(const Vector& reduced) const {
    Vector full = Vector::Zero(reduced.size() + 1);
    full.tail(reduced.size()) = reduced;
    return full;
  }

  const MacroOperators* op_;
  double dt_;
  SparseMatrix lhs_;
  SparseMatrix saddle_;
  Eigen::SparseMatrix<double> colmajor_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// One energy record of the trapezoidal scheme:
///   kinetic + elastic (n) = work (0..n) - dissipated (0..n)  up to solver precision.
struct EnergyRecord {
  double time = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double work = 0.0;
  double dissipated = 0.0;
  double residual() const { return kinetic + elastic - work + dissipated; }
};

struct MacroTrajectory {
  std::vector<MacroState> states;
  std::vector<EnergyRecord> energy;
};

inline EnergyRecord energy_of(const MacroOperators& op, const MacroState& s) {
  EnergyRecord e;
  e.time = s.time();
  e.kinetic = 0.5 * s.v.dot(op.M * s.v);
  e.elastic = 0.5 * s.u.dot(op.K * s.u);
  return e;
}

/// Full solve from homogeneous initial data (or `initial`) to T.
inline MacroTrajectory solve_macro(const MacroOperators& op, const LoadField& f, const LoadField& g,
                                   double T, double dt, const MacroState* initial = nullptr) {
  const Index steps = static_cast<Index>(std::llround(T / dt));
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * T)
    throw GridMismatch("solve_macro: T must be a positive multiple of dt");
  MacroStepper stepper(op, dt);
  MacroTrajectory tr;
  MacroState s = initial ? *initial : stepper.initial_state();
  s.dt = dt;
  tr.states.push_back(s);
  EnergyRecord acc = energy_of(op, s);
  acc.work = acc.kinetic + acc.elastic;  // initial energy counts as input
  tr.energy.push_back(acc);
  Vector load_n = macro_load(op, f, g, s.time());
  for (Index n = 0; n < steps; ++n) {
    const Vector load_np1 = macro_load(op, f, g, static_cast<double>(s.step + 1) * dt);
    MacroState next = stepper.step(s, load_n, load_np1);
    EnergyRecord e = energy_of(op, next);
    const Vector vb = 0.5 * (s.v + next.v);
    e.work = acc.work + dt * vb.dot(0.5 * (load_n + load_np1));
    e.dissipated = acc.dissipated + stepper.step_dissipation(s, next);
    tr.energy.push_back(e);
    tr.states.push_back(next);
    acc = e;
    s = std::move(next);
    load_n = load_np1;
  }
  return tr;
}

/// Static solve K u = F (tests and spatial convergence studies).
inline Vector solve_macro_static(const MacroOperators& op, const Vector& load) {
  SpdOptions so;
  so.tolerance = 1e-13;
  return solve_spd(op.K, load, so);
}

/// Mass-matrix L2 norm of a free-unknown field.
inline double macro_l2(const MacroOperators& op, const Vector& u) {
  const double r = op.rho0 > 0 ? op.rho0 : 1.0;
  return std::sqrt(std::max(0.0, u.dot(op.M * u) / r));
}

/// CSV: step,time,u_l2,v_l2,kinetic,elastic,work,dissipated
inline void write_macro_csv(std::ostream& out, const MacroOperators& op, const MacroTrajectory& tr) {
  out << "step,time,u_l2,v_l2,kinetic,elastic,work,dissipated\n";
  char buf[512];
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    const auto& e = tr.energy[i];
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(s.step), s.time(), macro_l2(op, s.u), macro_l2(op, s.v),
                  e.kinetic, e.elastic, e.work, e.dissipated);
    out << buf;
  }
}

}  // namespace aphom
