#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aphom/harness/config.hpp"
#include "aphom/harness/convergence.hpp"

namespace aphom {

namespace run_detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("--out", "cannot write '" + (dir / name).string() + "'");
  return out;
}

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string eps_tag(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

}  // namespace run_detail

/// Full-cell validation is implied by a laminate or by a phase-2 elastic coefficient.
inline CellDomain cell_domain_of(const SimConfig& c) {
  const CellGeometry g = build_cell(c.geometry);
  const bool full = g.validation_only() || c.coefficients.A0_phase2.has_value();
  return build_cell_domain(g, c.theta, c.mesh.cell, full);
}

inline MacroOptions macro_options_of(const SimConfig& c) {
  MacroOptions o;
  o.stabilization = c.solver.stabilization;
  o.tolerance = c.solver.macro_tolerance;
  return o;
}

inline BoxMesh macro_mesh_of(const SimConfig& c) {
  std::vector<long> cells;
  for (double l : c.lengths) cells.push_back(std::max(1L, std::lround(l * c.mesh.macro)));
  return BoxMesh(cells, c.lengths, false);
}

inline EffectiveModel homogenize(const SimConfig& c) {
  return assemble_effective(cell_domain_of(c), c.coefficients, c.cell_options());
}

/// Cell problems only. CSV: kind,load_row,load_col,corrector_l2,pressure_mean,iterations,residual
inline EffectiveModel run_cell(const SimConfig& c, const std::filesystem::path& out) {
  using run_detail::num;
  const CellDomain dom = cell_domain_of(c);
  const EffectiveModel m = assemble_effective(dom, c.coefficients, c.cell_options());
  auto csv = run_detail::open_output(out, "cell_correctors.csv");
  csv << "kind,load_row,load_col,corrector_l2,pressure_mean,iterations,residual\n";
  const SparseMatrix mass = assemble_scalar_mass_full(dom.mesh, [](Index) { return 1.0; }, full_mask(dom.mesh));
  const Vector ones = Vector::Ones(dom.mesh.num_nodes());
  const double vol = ones.dot(mass * ones);
  auto write = [&](const char* kind, const std::vector<CorrectorField>& fields) {
    for (std::size_t l = 0; l < fields.size(); ++l) {
      const auto& f = fields[l];
      double l2 = 0.0;
      for (int k = 0; k < m.dimension; ++k) {
        Vector comp(dom.mesh.num_nodes());
        for (Index n = 0; n < comp.size(); ++n) comp(n) = f.values(n * m.dimension + k);
        l2 += comp.dot(mass * comp);
      }
      const double pmean = f.pressure.size() ? ones.dot(mass * f.pressure) / vol : 0.0;
      csv << kind << "," << l / m.dimension << "," << l % m.dimension << "," << num(std::sqrt(l2 / vol)) << ","
          << num(pmean) << "," << f.info.iterations << "," << num(f.info.residual) << "\n";
    }
  };
  write("elastic", m.elastic);
  write("stokes", m.stokes);
  return m;
}

/// Effective coefficients: effective_report.txt and effective.csv.
inline EffectiveModel run_effective(const SimConfig& c, const std::filesystem::path& out) {
  const EffectiveModel m = homogenize(c);
  auto rep = run_detail::open_output(out, "effective_report.txt");
  rep << "# configuration " << c.name << "\n";
  write_effective_report(rep, m);
  auto csv = run_detail::open_output(out, "effective.csv");
  write_effective_csv(csv, m);
  return m;
}

/// Homogenized time stepping on the macro mesh: macro.csv.
inline MacroTrajectory run_macro(const SimConfig& c, const std::filesystem::path& out) {
  const EffectiveModel m = homogenize(c);
  const BoxMesh mesh = macro_mesh_of(c);
  const MacroOperators op = assemble_macro_system(m, mesh, macro_options_of(c));
  MacroTrajectory tr = solve_macro(op, c.f.field(c.dimension), c.g.field(c.dimension), c.T, c.dt);
  auto csv = run_detail::open_output(out, "macro.csv");
  write_macro_csv(csv, op, tr);
  return tr;
}

struct FineRun {
  double epsilon = 0.0;
  EnergyReport report;
};

/// Fine-scale runs, one per epsilon: fine_eps_<eps>.csv and the summary fine_energy.csv.
inline std::vector<FineRun> run_fine(const SimConfig& c, const std::filesystem::path& out) {
  if (c.epsilons.empty()) throw ConfigError("epsilons", "the epsilon list is empty");
  const CellGeometry geom = build_cell(c.geometry);
  std::vector<FineRun> runs(c.epsilons.size());
  std::vector<FineTrajectory> trajectories(c.epsilons.size());
  parallel_for(static_cast<int>(c.epsilons.size()), c.threads, [&](int i) {
    const EpsilonDomain dom = build_epsilon_domain(c.lengths, c.epsilons[i], c.theta, geom, c.mesh.fine);
    FineOptions fo;
    fo.stabilization = c.solver.stabilization;
    fo.single_phase_validation = c.single_phase_validation;
    const FineOperators op = assemble_fine_operators(dom, c.coefficients, fo);
    trajectories[i] = solve_fine(op, c.f.field(c.dimension), c.g.field(c.dimension), c.T, c.dt, false);
    runs[i].epsilon = c.epsilons[i];
    runs[i].report = energy_report(trajectories[i]);
  });
  using run_detail::num;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto csv = run_detail::open_output(out, "fine_eps_" + run_detail::eps_tag(runs[i].epsilon) + ".csv");
    write_fine_csv(csv, trajectories[i], c.dt);
  }
  auto sum = run_detail::open_output(out, "fine_energy.csv");
  sum << "epsilon,sup_u_solid,sup_grad_u_solid,sup_v_fluid,int_grad_v_fluid,pressure_l2,max_identity_residual,"
         "max_constraint_residual\n";
  for (const auto& r : runs) {
    sum << num(r.epsilon);
    for (double q : r.report.quantities()) sum << "," << num(q);
    sum << "," << num(r.report.max_identity_residual) << "," << num(r.report.max_constraint_residual) << "\n";
  }
  return runs;
}

inline ConvergenceSetup convergence_setup(const SimConfig& c) {
  ConvergenceSetup s;
  s.geometry = build_cell(c.geometry);
  s.theta = c.theta;
  s.coefficients = c.coefficients;
  s.lengths = c.lengths;
  s.f = c.f.field(c.dimension);
  s.g = c.g.field(c.dimension);
  s.T = c.T;
  s.dt = c.dt;
  s.epsilons = c.epsilons;
  s.cell_resolution = c.mesh.cell;
  s.fine_resolution = c.mesh.fine;
  s.macro_cells = c.mesh.macro;
  s.single_phase_validation = c.single_phase_validation;
  s.cell_options = c.cell_options();
  s.macro_options = macro_options_of(c);
  s.threads = c.threads;
  return s;
}

/// e(eps) for every epsilon: convergence.csv and convergence.dat.
inline ConvergenceRecord run_convergence(const SimConfig& c, const std::filesystem::path& out) {
  const ConvergenceRecord r = run_convergence_study(convergence_setup(c));
  auto csv = run_detail::open_output(out, "convergence.csv");
  write_convergence_csv(csv, r);
  auto dat = run_detail::open_output(out, "convergence.dat");
  write_convergence_dat(dat, r);
  return r;
}

/// Header documenting every norm that appears in the outputs.
inline void write_norm_definitions(std::ostream& out) {
  out << "# Norms\n"
         "#  space: mass-matrix quadrature of the Q1 fields on the mesh they live on\n"
         "#  time: composite trapezoid rule over the shared grid t_n = n dt\n"
         "#  e(eps) = ( sum_n w_n dt ( |u_eps - u0|^2 + |du_eps/dt - du0/dt|^2 ) )^(1/2), w_n = 1/2 at the ends\n"
         "#  u0 is interpolated (Q1) onto the fine mesh; floor = the same norm of u0(fine mesh) - u0(macro mesh)\n"
         "#  fine estimates: sup_t |u|^2 and |grad u|^2 on the solid, sup_t |u'|^2 on the fluid,\n"
         "#  int_0^T |grad u'|^2 on the fluid, ||p||_{L2(Q)} with the step-midpoint pressure\n";
}

/// Plain-text summary: configuration, norm definitions, effective medium and any
/// convergence or fine-run CSVs already present in `out`.
inline void run_report(const SimConfig& c, const std::filesystem::path& out) {
  const EffectiveModel m = homogenize(c);
  auto rep = run_detail::open_output(out, "report.txt");
  rep << "# report for configuration " << c.name << "\n";
  write_norm_definitions(rep);
  rep << "\n";
  write_effective_report(rep, m);
  for (const char* name : {"fine_energy.csv", "convergence.csv"}) {
    std::ifstream in(out / name);
    if (!in) continue;
    rep << "\n# " << name << "\n" << in.rdbuf();
  }
  rep << "\n# configuration (canonical)\n" << serialize_config(c);
}

}  // namespace aphom
