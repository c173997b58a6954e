#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "aphom/core/worker_pool.hpp"
#include "aphom/fine/fine_solver.hpp"
#include "aphom/homogenizer/homogenizer.hpp"
#include "aphom/macro/macro_solver.hpp"

namespace aphom {

/// Q1 interpolation from the free unknowns of a macro mesh to the free
/// unknowns of a fine mesh covering the same box.
inline SparseMatrix interpolation_matrix(const BoxMesh& macro, const DofMap& macro_dofs, const BoxMesh& fine,
                                         const DofMap& fine_dofs) {
  const int dim = macro.dimension();
  std::vector<Triplet> t;
  for (Index r = 0; r < fine_dofs.size(); ++r) {
    const Index full = fine_dofs.full(r);
    const Index node = full / dim;
    const int comp = static_cast<int>(full % dim);
    const Point x = fine.node_coordinates(node);
    Index cell = 0, stride = 1;
    double loc[3];
    for (int i = 0; i < dim; ++i) {
      const double s = x[i] / macro.spacing(i);
      long k = std::min<long>(static_cast<long>(std::floor(s)), macro.cells_per_axis()[i] - 1);
      k = std::max(k, 0L);
      loc[i] = s - static_cast<double>(k);
      cell += k * stride;
      stride *= macro.cells_per_axis()[i];
    }
    const auto nodes = macro.cell_nodes(cell);
    for (int a = 0; a < macro.corners_per_cell(); ++a) {
      double w = 1.0;
      for (int i = 0; i < dim; ++i) w *= ((a >> i) & 1) ? loc[i] : 1.0 - loc[i];
      if (std::abs(w) < 1e-14) continue;
      const Index c = macro_dofs.reduced(nodes[a] * dim + comp);
      if (c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), w);
    }
  }
  SparseMatrix p(fine_dofs.size(), macro_dofs.size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

/// Selects the unknowns of `from` that `to` also has, matched by full index.
inline SparseMatrix restriction_by_full_index(const DofMap& to, const DofMap& from) {
  std::vector<Triplet> t;
  for (Index r = 0; r < to.size(); ++r) {
    const Index c = from.reduced(to.full(r));
    if (c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), 1.0);
  }
  SparseMatrix p(to.size(), from.size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

/// Physics and discretization of one convergence study.
struct ConvergenceSetup {
  CellGeometry geometry{ShapeSpec{}};
  PoreDistribution theta = PoreDistribution::all_ones(2);
  CellCoefficients coefficients;
  Point lengths{1.0, 1.0};
  LoadField f, g;
  double T = 1.0, dt = 0.05;
  std::vector<double> epsilons;
  int cell_resolution = 16;    // mesh cells per unit of the cell problem
  int fine_resolution = 8;     // mesh cells per eps-cell
  int macro_cells = 32;        // per unit length
  bool single_phase_validation = false;
  CellSolveOptions cell_options;
  MacroOptions macro_options;
  /// Also solve the homogenized problem on each fine mesh; the distance to the
  /// coarse macro solution is the discretization floor of that entry.
  bool compute_floor = true;
  int threads = 1;
};

struct ConvergenceEntry {
  double epsilon = 0.0;
  double error = 0.0;      // (sum_n dt (|u - u0|^2 + |u' - u0'|^2))^(1/2), trapezoid in time
  double reference = 0.0;  // the same norm of u0
  double floor = 0.0;      // the same norm of u0(h_fine) - u0(h_macro)
  double fine_h = 0.0, macro_h = 0.0, dt = 0.0;
  double seconds = 0.0;
  Index fine_unknowns = 0;
};

struct ConvergenceRecord {
  EffectiveModel model;
  std::vector<ConvergenceEntry> entries;  // ordered as the eps list

  bool strictly_decreasing() const {
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
      if (!(entries[i + 1].error < entries[i].error)) return false;
    return true;
  }
};

inline void validate_epsilons(const std::vector<double>& eps) {
  if (eps.empty()) throw ConfigError("epsilons", "the epsilon list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("epsilons", "entries must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("epsilons", "the list must be strictly decreasing");
  }
}

/// Homogenize, solve the macro problem once, then each fine problem (concurrently)
/// and compare on the fine mesh over the shared time grid.
inline ConvergenceRecord run_convergence_study(const ConvergenceSetup& s) {
  validate_epsilons(s.epsilons);
  const int dim = static_cast<int>(s.lengths.size());
  ConvergenceRecord rec;
  const CellDomain cell = build_cell_domain(s.geometry, s.theta, s.cell_resolution);
  CellSolveOptions copt = s.cell_options;
  copt.single_phase_validation = s.single_phase_validation;
  copt.threads = s.threads;
  rec.model = assemble_effective(cell, s.coefficients, copt);

  std::vector<long> mc(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) mc[i] = std::lround(s.lengths[i] * s.macro_cells);
  const BoxMesh macro(mc, s.lengths, false);
  const MacroOperators mop = assemble_macro_system(rec.model, macro, s.macro_options);
  const MacroTrajectory mtr = solve_macro(mop, s.f, s.g, s.T, s.dt);

  rec.entries.resize(s.epsilons.size());
  parallel_for(static_cast<int>(s.epsilons.size()), s.threads, [&](int i) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = s.epsilons[i];
    const EpsilonDomain dom = build_epsilon_domain(s.lengths, eps, s.theta, s.geometry, s.fine_resolution);
    FineOptions fo;
    fo.single_phase_validation = s.single_phase_validation;
    const FineOperators fop = assemble_fine_operators(dom, s.coefficients, fo);
    const SparseMatrix interp = interpolation_matrix(macro, mop.dofs, dom.mesh, fop.velocity);
    const SparseMatrix mass = fop.mass_solid + fop.mass_fluid;
    std::vector<double> err2, ref2;
    auto observe = [&](const FineState& st) {
      const auto& ms = mtr.states[static_cast<std::size_t>(st.step)];
      const Vector u0 = interp * ms.u, v0 = interp * ms.v;
      const Vector du = st.u - u0, dv = st.v - v0;
      err2.push_back(du.dot(mass * du) + dv.dot(mass * dv));
      ref2.push_back(u0.dot(mass * u0) + v0.dot(mass * v0));
    };
    solve_fine(fop, s.f, s.g, s.T, s.dt, false, observe);
    std::vector<double> floor2;
    if (s.compute_floor) {
      const MacroOperators hop = assemble_macro_system(rec.model, dom.mesh, s.macro_options);
      const SparseMatrix same = restriction_by_full_index(fop.velocity, hop.dofs);
      const MacroTrajectory htr = solve_macro(hop, s.f, s.g, s.T, s.dt);
      for (std::size_t n = 0; n < htr.states.size(); ++n) {
        const Vector du = same * htr.states[n].u - interp * mtr.states[n].u;
        const Vector dv = same * htr.states[n].v - interp * mtr.states[n].v;
        floor2.push_back(du.dot(mass * du) + dv.dot(mass * dv));
      }
    }
    auto trapezoid = [&](const std::vector<double>& v) {
      double sum = 0.0;
      for (std::size_t n = 0; n < v.size(); ++n) sum += (n == 0 || n + 1 == v.size() ? 0.5 : 1.0) * v[n];
      return std::sqrt(s.dt * sum);
    };
    ConvergenceEntry& e = rec.entries[static_cast<std::size_t>(i)];
    e.epsilon = eps;
    e.error = trapezoid(err2);
    e.reference = trapezoid(ref2);
    e.floor = floor2.empty() ? 0.0 : trapezoid(floor2);
    e.fine_h = dom.mesh.spacing(0);
    e.macro_h = macro.spacing(0);
    e.dt = s.dt;
    e.fine_unknowns = fop.size() + fop.pressure.size();
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return rec;
}

/// CSV (format version 1): epsilon,error,relative_error,reference,floor,fine_h,macro_h,dt,fine_unknowns
/// Runtimes are left out so that repeated runs give identical files.
inline void write_convergence_csv(std::ostream& out, const ConvergenceRecord& r) {
  out << "epsilon,error,relative_error,reference,floor,fine_h,macro_h,dt,fine_unknowns\n";
  char buf[512];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld\n", e.epsilon, e.error,
                  e.reference > 0 ? e.error / e.reference : 0.0, e.reference, e.floor, e.fine_h, e.macro_h, e.dt,
                  static_cast<long long>(e.fine_unknowns));
    out << buf;
  }
}

/// Whitespace-separated columns for plotting: epsilon error relative_error floor.
inline void write_convergence_dat(std::ostream& out, const ConvergenceRecord& r) {
  out << "# epsilon error relative_error floor\n";
  char buf[256];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", e.epsilon, e.error,
                  e.reference > 0 ? e.error / e.reference : 0.0, e.floor);
    out << buf;
  }
}

}  // namespace aphom
