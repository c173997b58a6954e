#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <vector>

#include <Eigen/SparseLU>

#include "aphom/fem/assembly.hpp"
#include "aphom/geometry/epsilon_domain.hpp"
#include "aphom/homogenizer/cell_domain.hpp"
#include "aphom/macro/macro_solver.hpp"
#include "aphom/memory/kernel.hpp"
#include "aphom/memory/volterra.hpp"

namespace aphom {

struct FineOptions {
  double stabilization = 0.1;
  /// Admit theta == 0 (no skeleton) for single-material checks.
  bool single_phase_validation = false;
};

/// Operators of the global-displacement weak form on an eps-domain. Rows and
/// columns are the free velocity/displacement unknowns (zero on the outer wall);
/// pressure lives on the nodes of fluid cells.
struct FineOperators {
  const EpsilonDomain* domain = nullptr;  // not owned; must outlive the operators
  int dim = 0;
  double epsilon = 0.0;
  DofMap velocity;
  DofMap pressure;
  SparseMatrix M;       // rho^eps mass
  SparseMatrix Mf;      // chi_1 rho_1 mass, free rows x all unknowns (load f)
  SparseMatrix Mg;      // chi_2 rho_2 mass, free rows x all unknowns (load g)
  SparseMatrix K;       // A0 on the solid
  SparseMatrix D;       // B0 on the fluid
  SparseMatrix K1;      // spatial part of A1 on the solid
  SparseMatrix D1;      // spatial part of B1 on the fluid
  SparseMatrix B;       // -int_fluid q div v
  SparseMatrix Mp;      // pressure mass on the fluid
  SparseMatrix mass_solid, mass_fluid, grad_solid, grad_fluid;  // unit-weight norms
  MemoryKernel A1, B1;
  std::vector<double> cell_density, cell_viscosity;  // per mesh cell
  double stabilization = 0.1;
  bool has_solid = false, has_fluid = false;

  Index size() const { return velocity.size(); }
  bool memory() const { return !A1.is_zero() || !B1.is_zero(); }
};

/// Largest fast-time frequency of a kernel in cycles per unit tau.
inline double kernel_cycles(const MemoryKernel& k) {
  if (k.is_zero()) return 0.0;
  if (!k.temporal_profile.empty()) return k.temporal_profile.max_frequency() / (2.0 * std::numbers::pi);
  return 0.5 * static_cast<double>(k.samples());
}

inline FineOperators assemble_fine_operators(const EpsilonDomain& dom, const CellCoefficients& co,
                                             const FineOptions& opt = {}) {
  const BoxMesh& mesh = dom.mesh;
  const int dim = dom.dimension();
  if (co.dimension() != dim) throw ShapeError("assemble_fine_operators: coefficient and domain dimensions differ");
  FineOperators op;
  op.domain = &dom;
  op.dim = dim;
  op.epsilon = dom.epsilon;
  op.stabilization = opt.stabilization;
  op.A1 = co.A1;
  op.B1 = co.B1;
  const CellMask solid = phase_mask(mesh, Phase::Solid);
  const CellMask fluid = phase_mask(mesh, Phase::Fluid);
  op.has_solid = !mask_empty(solid);
  op.has_fluid = !mask_empty(fluid);
  if (!op.has_solid && !opt.single_phase_validation)
    throw PhaseError("assemble_fine_operators: the solid phase is empty (theta == 0); only admitted "
                     "for single-phase validation");

  op.velocity = DofMap(mesh.num_nodes(), dim, boundary_nodes(mesh));
  const DofMap all = DofMap::unconstrained(mesh.num_nodes(), dim);
  auto y_of = [&](Index c) { return dom.fast_coordinate(c); };
  auto is_solid = [&](Index c) { return mesh.phase(c) == Phase::Solid; };

  op.cell_density.resize(static_cast<std::size_t>(mesh.num_cells()));
  op.cell_viscosity.assign(static_cast<std::size_t>(mesh.num_cells()), 0.0);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const Point y = y_of(c);
    op.cell_density[c] = is_solid(c) ? co.rho1(y) : co.rho2(y);
    if (!(op.cell_density[c] > 0.0)) throw CoercivityViolation("assemble_fine_operators: density must be positive");
    if (!is_solid(c)) op.cell_viscosity[c] = co.B0(y).trace() / static_cast<double>(dim);
  }
  auto vmass = [&](const std::function<double(Index)>& w, const CellMask& m) {
    return lift_to_vector(assemble_scalar_mass_full(mesh, w, m), dim);
  };
  auto density = [&](Index c) { return op.cell_density[c]; };
  const SparseMatrix mf = vmass(density, solid), mg = vmass(density, fluid);
  op.M = op.velocity.reduce(SparseMatrix(mf + mg));
  op.Mf = op.velocity.reduce(mf, all);
  op.Mg = op.velocity.reduce(mg, all);
  auto unit = [](Index) { return 1.0; };
  op.mass_solid = op.velocity.reduce(vmass(unit, solid));
  op.mass_fluid = op.velocity.reduce(vmass(unit, fluid));
  op.grad_solid = op.velocity.reduce(lift_to_vector(assemble_scalar_laplacian_full(mesh, unit, solid), dim));
  op.grad_fluid = op.velocity.reduce(lift_to_vector(assemble_scalar_laplacian_full(mesh, unit, fluid), dim));

  op.K = op.velocity.reduce(assemble_vector_elliptic_full(
      mesh, [&](Index c) { return lift_row_tensor(co.A0(y_of(c))); }, solid));
  op.D = op.velocity.reduce(assemble_vector_elliptic_full(
      mesh, [&](Index c) { return lift_row_tensor(co.B0(y_of(c))); }, fluid));
  const Index n = op.velocity.size();
  op.K1 = co.A1.is_zero() ? SparseMatrix(n, n)
                          : op.velocity.reduce(assemble_vector_elliptic_full(
                                mesh, [&](Index c) { return lift_row_tensor(co.A1.spatial(y_of(c))); }, solid, false));
  op.D1 = co.B1.is_zero() ? SparseMatrix(n, n)
                          : op.velocity.reduce(assemble_vector_elliptic_full(
                                mesh, [&](Index c) { return lift_row_tensor(co.B1.spatial(y_of(c))); }, fluid, false));
  if (op.has_fluid) {
    const auto p_nodes = nodes_of(mesh, fluid);
    std::vector<char> p_fixed(p_nodes.size());
    for (std::size_t i = 0; i < p_nodes.size(); ++i) p_fixed[i] = !p_nodes[i];
    op.pressure = DofMap(mesh.num_nodes(), 1, p_fixed);
    op.B = op.pressure.reduce(assemble_divergence_full(mesh, fluid), op.velocity);
    op.Mp = op.pressure.reduce(assemble_scalar_mass_full(mesh, unit, fluid));
  } else {
    op.pressure = DofMap(mesh.num_nodes(), 1, std::vector<char>(static_cast<std::size_t>(mesh.num_nodes()), 1));
  }
  return op;
}

/// Nodal load  int (chi_1 rho_1 f + chi_2 rho_2 g) . psi  at time t.
inline Vector fine_load(const FineOperators& op, const LoadField& f, const LoadField& g, double t) {
  const BoxMesh& mesh = op.domain->mesh;
  Vector nf(mesh.num_nodes() * op.dim), ng(mesh.num_nodes() * op.dim);
  for (Index n = 0; n < mesh.num_nodes(); ++n) {
    const Point x = mesh.node_coordinates(n);
    nf.segment(n * op.dim, op.dim) = f(x, t);
    ng.segment(n * op.dim, op.dim) = g(x, t);
  }
  return op.Mf * nf + op.Mg * ng;
}

struct FineState {
  Vector u;         // global displacement, free unknowns
  Vector v;         // its velocity
  Vector pressure;  // fluid pressure of the last step (midpoint), fluid nodes
  Index step = 0;
  double dt = 0.0;
  double time() const { return static_cast<double>(step) * dt; }
};

/// Per-step bookkeeping of the discrete energy identity
///   kinetic + elastic = work - dissipated - memory_work.
struct FineEnergy {
  double time = 0.0;
  double kinetic = 0.0, elastic = 0.0;
  double work = 0.0, dissipated = 0.0, memory_work = 0.0;
  double u_solid = 0.0;       // ||u||^2 on the solid
  double grad_u_solid = 0.0;  // ||grad u||^2 on the solid
  double v_fluid = 0.0;       // ||du/dt||^2 on the fluid
  double grad_v_fluid = 0.0;  // ||grad du/dt||^2 on the fluid
  double pressure = 0.0;      // ||p||^2 on the fluid
  double constraint = 0.0;    // relative stabilized divergence residual of the step
  double residual() const { return kinetic + elastic - work + dissipated + memory_work; }
};

/// Trapezoidal stepper for
///   M u'' + D u' + K u + K1 * u + D1 * u' + B^T p = F,   B u' = 0 on the fluid,
/// where * is the fast-time convolution with q(t/eps). The memory terms use the
/// lagged current-step weight; all other terms are implicit. The step matrix is
/// factorized once.
class FineStepper {
 public:
  FineStepper(const FineOperators& op, double dt, Index max_steps) : op_(&op), dt_(dt) {
    if (!(dt > 0.0)) throw SolverDiverged("FineStepper: time step must be positive", 0, 0.0);
    const double cycles = std::max(kernel_cycles(op.A1), kernel_cycles(op.B1));
    if (cycles > 0.0 && dt > op.epsilon / (8.0 * cycles) * (1.0 + 1e-12))
      throw GridMismatch("FineStepper: dt = " + std::to_string(dt) + " under-resolves the fast-time kernel; need dt <= eps / (8 k_max) = " +
                         std::to_string(op.epsilon / (8.0 * cycles)));
    if (!op.A1.is_zero()) qa_ = physical_kernel_samples(op.A1, dt, op.epsilon, max_steps + 1);
    if (!op.B1.is_zero()) qb_ = physical_kernel_samples(op.B1, dt, op.epsilon, max_steps + 1);
    hu_ = FieldHistory(dt);
    hv_ = FieldHistory(dt);
    factorize();
  }

  FineState initial_state() const {
    FineState s;
    s.u = Vector::Zero(op_->size());
    s.v = Vector::Zero(op_->size());
    s.pressure = Vector::Zero(op_->pressure.size());
    s.dt = dt_;
    return s;
  }

  /// Memory force at step n from the stored history; lagged when step n is not stored yet.
  Vector memory_force(Index n) const {
    Vector m = Vector::Zero(op_->size());
    if (n == 0) return m;
    const bool lag = hu_.length() == n;
    if (!qa_.empty()) m += op_->K1 * (lag ? volterra_convolve_lagged(qa_, hu_, n) : volterra_convolve(qa_, hu_, n));
    if (!qb_.empty()) m += op_->D1 * (lag ? volterra_convolve_lagged(qb_, hv_, n) : volterra_convolve(qb_, hv_, n));
    return m;
  }

  FineState step(const FineState& s, const Vector& load_n, const Vector& load_np1, FineEnergy* e = nullptr) {
    const FineOperators& op = *op_;
    const double dt = dt_;
    if (hu_.length() != s.step) throw HistoryError("FineStepper: state does not continue the stored history");
    hu_.append(s.u);
    hv_.append(s.v);
    Vector mbar = Vector::Zero(op.size());
    if (op.memory()) mbar = 0.5 * (memory_force(s.step) + memory_force(s.step + 1));
    const Vector fbar = 0.5 * (load_n + load_np1);
    const Vector rhs = dt * (fbar - mbar) + op.M * s.v - (0.5 * dt) * (op.D * s.v) - dt * (op.K * s.u) -
                       (0.25 * dt * dt) * (op.K * s.v);
    const Index nv = op.size(), np = op.has_fluid ? op.pressure.size() - pinned_ : 0;
    Vector b(nv + np);
    b.head(nv) = rhs;
    if (np) b.tail(np) = restrict_pressure(Vector(-(op.B * s.v)));
    const Vector x = lu_->solve(b);
    if (lu_->info() != Eigen::Success) throw SolverDiverged("FineStepper: step solve failed", 0, 0.0);
    FineState next;
    next.v = x.head(nv);
    next.u = s.u + (0.5 * dt) * (s.v + next.v);
    next.pressure = Vector::Zero(op.pressure.size());
    Vector q = Vector::Zero(op.pressure.size());
    if (np) {
      q = expand_pressure(x.tail(np));
      next.pressure = q / dt;
    }
    next.step = s.step + 1;
    next.dt = dt;
    if (e) {
      const Vector vb = 0.5 * (s.v + next.v);
      e->time = next.time();
      e->work += dt * vb.dot(fbar);
      e->dissipated += dt * vb.dot(op.D * vb);
      e->memory_work += dt * vb.dot(mbar);
      if (np) {
        e->dissipated += dt * next.pressure.dot(op.B * vb);
        const Vector bv = op.B * vb;
        const Vector r = bv - S_ * q;
        e->constraint = r.norm() / std::max((op.B.cwiseAbs() * vb.cwiseAbs()).norm(), 1e-300);
      }
      e->kinetic = 0.5 * next.v.dot(op.M * next.v);
      e->elastic = 0.5 * next.u.dot(op.K * next.u);
      e->u_solid = next.u.dot(op.mass_solid * next.u);
      e->grad_u_solid = next.u.dot(op.grad_solid * next.u);
      e->v_fluid = next.v.dot(op.mass_fluid * next.v);
      e->grad_v_fluid = next.v.dot(op.grad_fluid * next.v);
      e->pressure = np ? next.pressure.dot(op.Mp * next.pressure) : 0.0;
    }
    return next;
  }

 private:
  void factorize() {
    const FineOperators& op = *op_;
    const BoxMesh& mesh = op.domain->mesh;
    SparseMatrix lhs = op.M + (0.5 * dt_) * op.D + (0.25 * dt_ * dt_) * op.K;
    const Index nv = op.size();
    std::vector<Triplet> t;
    for (int k = 0; k < lhs.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(lhs, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    Index np = 0;
    if (op.has_fluid) {
      double h = 0.0;
      for (int i = 0; i < mesh.dimension(); ++i) h = std::max(h, mesh.spacing(i));
      // S = delta h^2 / alpha  int grad p . grad q, alpha the local coefficient of the step matrix
      auto w = [&](Index c) {
        const double alpha = op.cell_density[c] * h * h + 0.5 * dt_ * op.cell_viscosity[c];
        return op.stabilization * h * h / alpha;
      };
      S_ = op.pressure.reduce(assemble_scalar_laplacian_full(mesh, w, phase_mask(mesh, Phase::Fluid)));
      // without a skeleton the pressure constant is in the kernel of B^T and S
      pinned_ = op.has_solid ? 0 : 1;
      np = op.pressure.size() - pinned_;
      for (int k = 0; k < op.B.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(op.B, k); it; ++it) {
          if (it.row() < pinned_) continue;
          const int p = static_cast<int>(nv + it.row() - pinned_);
          t.emplace_back(p, it.col(), it.value());
          t.emplace_back(it.col(), p, it.value());
        }
      for (int k = 0; k < S_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(S_, k); it; ++it) {
          if (it.row() < pinned_ || it.col() < pinned_) continue;
          t.emplace_back(static_cast<int>(nv + it.row() - pinned_), static_cast<int>(nv + it.col() - pinned_),
                         -2.0 * it.value());
        }
    }
    Eigen::SparseMatrix<double> a(nv + np, nv + np);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(a);
    if (lu_->info() != Eigen::Success) throw SolverDiverged("FineStepper: factorization failed", 0, 0.0);
  }

  Vector restrict_pressure(const Vector& full) const { return full.tail(full.size() - pinned_); }
  Vector expand_pressure(const Vector& reduced) const {
    Vector full = Vector::Zero(reduced.size() + pinned_);
    full.tail(reduced.size()) = reduced;
    return full;
  }

  const FineOperators* op_;
  double dt_;
  std::vector<double> qa_, qb_;
  FieldHistory hu_, hv_;
  SparseMatrix S_;
  Index pinned_ = 0;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

struct FineTrajectory {
  std::vector<FineState> states;  // kept when requested
  std::vector<FineEnergy> energy; // entry 0 is the initial state
};

using FineObserver = std::function<void(const FineState&)>;

inline FineTrajectory solve_fine(const FineOperators& op, const LoadField& f, const LoadField& g, double T,
                                 double dt, bool keep_states = true, const FineObserver& observe = {}) {
  const Index steps = static_cast<Index>(std::llround(T / dt));
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * T)
    throw GridMismatch("solve_fine: T must be a positive multiple of dt");
  FineStepper stepper(op, dt, steps);
  FineTrajectory tr;
  FineState s = stepper.initial_state();
  if (observe) observe(s);
  if (keep_states) tr.states.push_back(s);
  FineEnergy e;
  tr.energy.push_back(e);
  Vector load_n = fine_load(op, f, g, 0.0);
  for (Index n = 0; n < steps; ++n) {
    const Vector load_np1 = fine_load(op, f, g, static_cast<double>(n + 1) * dt);
    s = stepper.step(s, load_n, load_np1, &e);
    tr.energy.push_back(e);
    if (observe) observe(s);
    if (keep_states) tr.states.push_back(s);
    load_n = load_np1;
  }
  return tr;
}

/// The discrete analogues of the a priori estimates, with the largest relative
/// energy-identity and constraint residuals over the run.
struct EnergyReport {
  double sup_u_solid = 0.0;
  double sup_grad_u_solid = 0.0;
  double sup_v_fluid = 0.0;
  double int_grad_v_fluid = 0.0;
  double pressure_l2 = 0.0;  // ||p||_{L2(Q)}
  double max_identity_residual = 0.0;
  double max_constraint_residual = 0.0;
  std::vector<std::string> exceeded;

  std::array<double, 5> quantities() const {
    return {sup_u_solid, sup_grad_u_solid, sup_v_fluid, int_grad_v_fluid, pressure_l2};
  }
};

inline EnergyReport energy_report(const FineTrajectory& tr, double bound = 0.0) {
  EnergyReport r;
  if (tr.energy.empty()) return r;
  double p2 = 0.0;
  double scale = 0.0;
  for (const auto& e : tr.energy) scale = std::max({scale, e.work, e.kinetic + e.elastic, e.dissipated, std::abs(e.memory_work)});
  for (std::size_t i = 0; i < tr.energy.size(); ++i) {
    const auto& e = tr.energy[i];
    r.sup_u_solid = std::max(r.sup_u_solid, e.u_solid);
    r.sup_grad_u_solid = std::max(r.sup_grad_u_solid, e.grad_u_solid);
    r.sup_v_fluid = std::max(r.sup_v_fluid, e.v_fluid);
    if (i > 0) {
      const double dt = e.time - tr.energy[i - 1].time;
      r.int_grad_v_fluid += 0.5 * dt * (e.grad_v_fluid + tr.energy[i - 1].grad_v_fluid);
      p2 += dt * e.pressure;  // midpoint pressure of the step
    }
    if (scale > 0.0) r.max_identity_residual = std::max(r.max_identity_residual, std::abs(e.residual()) / scale);
    r.max_constraint_residual = std::max(r.max_constraint_residual, e.constraint);
  }
  r.pressure_l2 = std::sqrt(p2);
  if (bound > 0.0) {
    const char* names[5] = {"sup_u_solid", "sup_grad_u_solid", "sup_v_fluid", "int_grad_v_fluid", "pressure_l2"};
    const auto q = r.quantities();
    for (int i = 0; i < 5; ++i)
      if (q[i] > bound) r.exceeded.push_back(names[i]);
  }
  return r;
}

/// CSV: step,time,u_solid,grad_u_solid,v_fluid,grad_v_fluid,pressure,kinetic,elastic,work,dissipated,memory_work
inline void write_fine_csv(std::ostream& out, const FineTrajectory& tr, double dt) {
  out << "step,time,u_solid,grad_u_solid,v_fluid,grad_v_fluid,pressure,kinetic,elastic,work,dissipated,memory_work\n";
  char buf[768];
  for (std::size_t i = 0; i < tr.energy.size(); ++i) {
    const auto& e = tr.energy[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                  static_cast<double>(i) * dt, e.u_solid, e.grad_u_solid, e.v_fluid, e.grad_v_fluid, e.pressure,
                  e.kinetic, e.elastic, e.work, e.dissipated, e.memory_work);
    out << buf;
  }
}

}  // namespace aphom
