#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "aphom/ap/torus.hpp"
#include "aphom/core/worker_pool.hpp"
#include "aphom/fem/assembly.hpp"
#include "aphom/fem/krylov.hpp"
#include "aphom/homogenizer/cell_domain.hpp"
#include "aphom/memory/kernel.hpp"

namespace aphom {

struct CellSolveOptions {
  double spd_tolerance = 1e-11;
  double saddle_tolerance = 1e-10;
  double stabilization = 0.1;
  /// Also form the corrector modes m != 0 of the fast-time expansion. They are
  /// unforced, so each vanishes once its operator is shown to be coercive.
  bool fast_time_modes = false;
  /// Admit a cell without solid (theta == 0) for single-material checks.
  bool single_phase_validation = false;
  int threads = 1;
};

/// Corrector of one cell problem for a fixed macroscopic gradient xi.
struct CorrectorField {
  Matrix xi;
  Vector values;    // nodal vector field on the cell mesh (interleaved, all nodes)
  Vector pressure;  // nodal pressure on the cell mesh, Stokes only
  std::vector<int> mode_frequencies;
  std::vector<Vector> modes;  // fast-time modes, modes[0] == values when requested
  SolveInfo info;
};

/// Fast-time factor multiplying the kernel's spatial part against tau-independent
/// fields: the torus convolution of q with 1, averaged over the fast period.
inline double fast_time_factor(const MemoryKernel& k) {
  if (k.is_zero() || k.samples() == 0) return 0.0;
  GridFunction q({static_cast<long>(k.samples())}, k.temporal);
  return torus_convolve(q, GridFunction::constant(q.shape(), 1.0)).mean();
}

/// A0 + M_tau(A1) on the skeleton (and the phase-2 coefficient in validation mode), lifted.
inline Matrix elastic_tensor(const CellDomain& dom, const CellCoefficients& co, Index cell,
                             double memory_factor) {
  const Point y = dom.mesh.cell_centroid(cell);
  if (dom.full_cell_validation && dom.mesh.phase(cell) == Phase::Fluid) {
    if (!co.A0_phase2) throw PhaseError("elastic_tensor: validation mode needs the phase-2 coefficient");
    return lift_row_tensor((*co.A0_phase2)(y));
  }
  Matrix a = co.A0(y);
  if (memory_factor != 0.0) a += memory_factor * co.A1.spatial(y);
  return lift_row_tensor(a);
}

inline Matrix viscous_tensor(const CellDomain& dom, const CellCoefficients& co, Index cell,
                             double memory_factor) {
  const Point y = dom.mesh.cell_centroid(cell);
  Matrix b = co.B0(y);
  if (memory_factor != 0.0) b += memory_factor * co.B1.spatial(y);
  return lift_row_tensor(b);
}

namespace detail {

inline CellMask elastic_mask(const CellDomain& dom) {
  return dom.full_cell_validation ? full_mask(dom.mesh) : phase_mask(dom.mesh, Phase::Solid);
}

}  // namespace detail

/// Elastic cell problem on the skeleton:
///   -div((A0 + M_tau A1)(xi + grad u)) = 0 in Y1,  u = 0 on the fluid part.
/// In full-cell validation mode the problem is periodic on all of Y with zero mean.
inline CorrectorField solve_elastic_cell(const CellDomain& dom, const CellCoefficients& co,
                                         const Matrix& xi, const CellSolveOptions& opt = {}) {
  const int dim = dom.dimension();
  if (xi.rows() != dim || xi.cols() != dim) throw ShapeError("solve_elastic_cell: xi must be N x N");
  const BoxMesh& mesh = dom.mesh;
  const CellMask mask = detail::elastic_mask(dom);
  if (mask_empty(mask)) throw PhaseError("solve_elastic_cell: the solid phase is empty");
  const double mf = fast_time_factor(co.A1);
  const TensorField coeff = [&](Index c) { return elastic_tensor(dom, co, c, mf); };

  std::vector<char> fixed(static_cast<std::size_t>(mesh.num_nodes()), 0);
  if (!dom.full_cell_validation) fixed = nodes_of(mesh, phase_mask(mesh, Phase::Fluid));
  const DofMap dofs(mesh.num_nodes(), dim, fixed);
  bool any_fixed = false;
  for (char c : fixed) any_fixed = any_fixed || c;

  CorrectorField out;
  out.xi = xi;
  out.values = Vector::Zero(mesh.num_nodes() * dim);
  if (dofs.size() > 0) {
    const SparseMatrix k = dofs.reduce(assemble_vector_elliptic_full(mesh, coeff, mask));
    const Vector xf = flatten(xi);
    const Vector load = assemble_stress_load_full(
        mesh, [&](Index c) { return Vector(coeff(c) * xf); }, mask);
    SpdOptions so;
    so.tolerance = opt.spd_tolerance;
    // zero mean per component fixes the constants when nothing is clamped
    so.project_constants = any_fixed ? 0 : dim;
    out.values = dofs.expand(solve_spd(k, dofs.restrict(load), so, &out.info));
  }

  if (opt.fast_time_modes && !co.A1.is_zero()) {
    const auto c = temporal_modes(co.A1);
    for (int m = 0; m < co.A1.samples(); ++m) {
      out.mode_frequencies.push_back(mode_frequency(m, co.A1.samples()));
      if (m == 0) {
        out.modes.push_back(out.values);
        continue;
      }
      // Hermitian part of A0 + c_m A1: coercive => the unforced mode vanishes
      for (Index cell = 0; cell < mesh.num_cells(); ++cell) {
        if (!mask[static_cast<std::size_t>(cell)]) continue;
        const Point y = mesh.cell_centroid(cell);
        const Matrix herm = co.A0(y) + c[static_cast<std::size_t>(m)].real() * co.A1.spatial(y);
        check_coercive(herm, "solve_elastic_cell (fast-time mode " +
                                 std::to_string(out.mode_frequencies.back()) + ")");
      }
      out.modes.push_back(Vector::Zero(out.values.size()));
    }
  }
  return out;
}

/// Stokes cell problem on the fluid part with v = 0 on the skeleton:
///   -div((B0 + M_tau B1)(xi + grad v)) + grad pi = 0,  div v = 0  in Y2.
/// Pressure is normalized to zero mean over the fluid.
inline CorrectorField solve_stokes_cell(const CellDomain& dom, const CellCoefficients& co,
                                        const Matrix& xi, const CellSolveOptions& opt = {}) {
  const int dim = dom.dimension();
  if (xi.rows() != dim || xi.cols() != dim) throw ShapeError("solve_stokes_cell: xi must be N x N");
  if (dom.full_cell_validation)
    throw GeometryViolation("solve_stokes_cell: full-cell validation domains carry no fluid problem");
  const BoxMesh& mesh = dom.mesh;
  const CellMask fluid = phase_mask(mesh, Phase::Fluid);
  const double mf = fast_time_factor(co.B1);
  const TensorField visc = [&](Index c) { return viscous_tensor(dom, co, c, mf); };
  const StokesBlocks blocks = assemble_stokes(mesh, visc, fluid, opt.stabilization);

  const Vector xf = flatten(xi);
  const Vector load = blocks.velocity.restrict(
      assemble_stress_load_full(mesh, [&](Index c) { return Vector(visc(c) * xf); }, fluid));
  double nu = 0.0;
  Index nf = 0;
  for (Index c = 0; c < mesh.num_cells(); ++c)
    if (fluid[static_cast<std::size_t>(c)]) {
      nu += visc(c).trace() / static_cast<double>(dim * dim);
      ++nf;
    }
  nu /= static_cast<double>(nf);
  const auto prec = stokes_preconditioner(blocks.A, blocks.Mp, blocks.S, nu);
  SaddleOptions so;
  so.tolerance = opt.saddle_tolerance;
  so.pressure_weights = blocks.pressure_weights;
  // the trace of xi only shifts the pressure constant: on the periodic fluid
  // part with v = 0 on the skeleton, int div v = 0 holds for every admissible v
  const auto sol = solve_saddle(blocks.A, blocks.B, blocks.S, load,
                                Vector::Zero(blocks.pressure.size()), prec, so);
  CorrectorField out;
  out.xi = xi;
  out.values = blocks.velocity.expand(sol.velocity);
  out.pressure = blocks.pressure.expand(sol.pressure);
  out.info = sol.info;
  return out;
}

/// Stabilized constraint residual  B v - S pi  per pressure node, divided by
/// the nodal fluid volume; the discrete divergence of the corrector.
inline Vector stokes_divergence(const CellDomain& dom, const CellCoefficients& co,
                                const CorrectorField& v, double stabilization = 0.1) {
  const CellMask fluid = phase_mask(dom.mesh, Phase::Fluid);
  const double mf = fast_time_factor(co.B1);
  const TensorField visc = [&](Index c) { return viscous_tensor(dom, co, c, mf); };
  const StokesBlocks b = assemble_stokes(dom.mesh, visc, fluid, stabilization);
  Vector r = b.B * b.velocity.restrict(v.values) - b.S * b.pressure.restrict(v.pressure);
  // B carries a minus sign: B v = -int q div v
  return -r.cwiseQuotient(b.pressure_weights);
}

/// Mean of div v over the fluid part.
inline double mean_fluid_divergence(const CellDomain& dom, const CorrectorField& v) {
  const CellMask fluid = phase_mask(dom.mesh, Phase::Fluid);
  const Vector w = assemble_basis_integrals(dom.mesh, fluid);
  const DofMap all = DofMap::unconstrained(dom.mesh.num_nodes(), 1);
  const SparseMatrix b = assemble_divergence_full(dom.mesh, fluid);
  const double integral = -(Vector::Ones(b.rows()).transpose() * (b * v.values))(0);
  return integral / w.sum();
}

/// The homogenized medium.
struct EffectiveModel {
  int dimension = 0;
  double rho0 = 0.0;
  double weight_f = 0.0;  // M(chi_1 rho_1)
  double weight_g = 0.0;  // M(chi_2 rho_2)
  double solid_fraction = 0.0;
  double fluid_fraction = 0.0;
  Matrix C0;  // N^2 x N^2
  Matrix C1;  // N^2 x N^2
  Vector H;   // h(xi) = H : xi
  std::vector<CorrectorField> elastic;  // unit loads e_i (x) e_j in row-major order
  std::vector<CorrectorField> stokes;

  /// F = M(chi_1 rho_1) f + M(chi_2 rho_2) g.
  Vector load(const Vector& f, const Vector& g) const { return weight_f * f + weight_g * g; }
};

inline Matrix unit_load(int dim, int i, int j) {
  Matrix xi = Matrix::Zero(dim, dim);
  xi(i, j) = 1.0;
  return xi;
}

/// Midpoint quadrature of (M(chi_1 rho_1), M(chi_2 rho_2), M(chi_1)) over the cell domain.
inline std::array<double, 3> density_weights(const CellDomain& dom, const CellCoefficients& co,
                                             int per_unit = 512) {
  const int dim = dom.dimension();
  // keep the sample count manageable in three dimensions
  double vol = dom.volume();
  while (per_unit > 8 && std::pow(per_unit, dim) * vol > double(1 << 22)) per_unit /= 2;
  std::vector<long> n(static_cast<std::size_t>(dim));
  long total = 1;
  for (int i = 0; i < dim; ++i) {
    n[i] = dom.period[i] * per_unit;
    total *= n[i];
  }
  double s1 = 0.0, s2 = 0.0, c1 = 0.0;
  Point y(static_cast<std::size_t>(dim));
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (int i = 0; i < dim; ++i) {
      y[i] = (static_cast<double>(r % n[i]) + 0.5) / per_unit;
      r /= n[i];
    }
    if (dom.is_solid(y)) {
      s1 += co.rho1(y);
      c1 += 1.0;
    } else {
      s2 += co.rho2(y);
    }
  }
  return {s1 / total, s2 / total, c1 / total};
}

/// Effective coefficients from the N^2 unit-load cell problems.
inline EffectiveModel assemble_effective(const CellDomain& dom, const CellCoefficients& co,
                                         const CellSolveOptions& opt = {}) {
  const int dim = dom.dimension();
  const int nl = dim * dim;
  const BoxMesh& mesh = dom.mesh;
  EffectiveModel m;
  m.dimension = dim;
  m.C0 = Matrix::Zero(nl, nl);
  m.C1 = Matrix::Zero(nl, nl);
  m.H = Vector::Zero(nl);
  const CellMask emask = detail::elastic_mask(dom);
  const CellMask fluid = phase_mask(mesh, Phase::Fluid);
  const bool has_solid = !mask_empty(emask);
  const bool has_fluid = !dom.full_cell_validation && !mask_empty(fluid);
  if (!has_solid && !opt.single_phase_validation)
    throw PhaseError("assemble_effective: the skeleton is empty (theta == 0); only admitted for "
                     "single-phase validation");

  if (has_solid) m.elastic.resize(static_cast<std::size_t>(nl));
  if (has_fluid) m.stokes.resize(static_cast<std::size_t>(nl));
  const int jobs = (has_solid ? nl : 0) + (has_fluid ? nl : 0);
  parallel_for(jobs, opt.threads, [&](int job) {
    const bool elastic = has_solid && job < nl;
    const int l = elastic || !has_solid ? job : job - nl;
    const Matrix xi = unit_load(dim, l / dim, l % dim);
    if (elastic)
      m.elastic[static_cast<std::size_t>(l)] = solve_elastic_cell(dom, co, xi, opt);
    else
      m.stokes[static_cast<std::size_t>(l)] = solve_stokes_cell(dom, co, xi, opt);
  });

  const Q1Element el(mesh);
  const double cell_vol = mesh.cell_volume() / dom.volume();
  const double mfa = fast_time_factor(co.A1), mfb = fast_time_factor(co.B1);
  for (int l = 0; l < nl; ++l) {
    const Vector e = flatten(unit_load(dim, l / dim, l % dim));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      if (has_solid && emask[static_cast<std::size_t>(c)]) {
        const Vector g = e + cell_gradient(mesh, el, m.elastic[l].values, c);
        m.C0.col(l) += cell_vol * elastic_tensor(dom, co, c, mfa) * g;
      }
      if (has_fluid && fluid[static_cast<std::size_t>(c)]) {
        const Vector g = e + cell_gradient(mesh, el, m.stokes[l].values, c);
        m.C1.col(l) += cell_vol * viscous_tensor(dom, co, c, mfb) * g;
      }
    }
    if (has_fluid) {
      const Vector w = assemble_basis_integrals(mesh, fluid);
      m.H(l) = w.dot(m.stokes[l].pressure) / dom.volume();
    }
  }
  const auto w = density_weights(dom, co);
  m.weight_f = w[0];
  m.weight_g = w[1];
  m.rho0 = w[0] + w[1];
  m.solid_fraction = w[2];
  m.fluid_fraction = 1.0 - w[2];
  return m;
}

/// Plain-text report of the effective medium.
inline void write_effective_report(std::ostream& out, const EffectiveModel& m) {
  out << std::setprecision(17);
  out << "# effective medium\n";
  out << "dimension " << m.dimension << "\n";
  out << "rho0 " << m.rho0 << "\n";
  out << "weight_f " << m.weight_f << "\n";
  out << "weight_g " << m.weight_g << "\n";
  out << "solid_fraction " << m.solid_fraction << "\n";
  out << "fluid_fraction " << m.fluid_fraction << "\n";
  auto write_matrix = [&](const char* name, const Matrix& a) {
    out << name << " " << a.rows() << "x" << a.cols() << "\n";
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < a.cols(); ++j) out << (j ? " " : "") << a(i, j);
      out << "\n";
    }
  };
  write_matrix("C0", m.C0);
  write_matrix("C1", m.C1);
  out << "H";
  for (Index i = 0; i < m.H.size(); ++i) out << " " << m.H(i);
  out << "\n";
}

/// CSV: quantity,row,col,value.
inline void write_effective_csv(std::ostream& out, const EffectiveModel& m) {
  out << "quantity,row,col,value\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "rho0,0,0," << num(m.rho0) << "\n";
  out << "weight_f,0,0," << num(m.weight_f) << "\n";
  out << "weight_g,0,0," << num(m.weight_g) << "\n";
  for (Index i = 0; i < m.C0.rows(); ++i)
    for (Index j = 0; j < m.C0.cols(); ++j) out << "C0," << i << "," << j << "," << num(m.C0(i, j)) << "\n";
  for (Index i = 0; i < m.C1.rows(); ++i)
    for (Index j = 0; j < m.C1.cols(); ++j) out << "C1," << i << "," << j << "," << num(m.C1(i, j)) << "\n";
  for (Index i = 0; i < m.H.size(); ++i) out << "H," << i << ",0," << num(m.H(i)) << "\n";
}

/// Value and gradient of a nodal Q1 vector field at a point; on cell faces
/// the gradient is averaged over the adjacent cells.
inline std::pair<Vector, Matrix> evaluate_field(const BoxMesh& mesh, const Vector& full, int comps,
                                                const Point& x_in) {
  const int dim = mesh.dimension();
  Point x(x_in);
  if (mesh.periodic())
    for (int i = 0; i < dim; ++i) x[i] -= std::floor(x[i] / mesh.lengths()[i]) * mesh.lengths()[i];
  // candidate cells: floor and, on a face, the neighbour below
  std::vector<std::vector<long>> options(static_cast<std::size_t>(dim));
  std::vector<double> t(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    const double s = x[i] / mesh.spacing(i);
    const long n = mesh.cells_per_axis()[i];
    long k = static_cast<long>(std::floor(s + 1e-12));
    const bool on_face = std::abs(s - std::round(s)) < 1e-9;
    if (on_face) k = std::lround(s);
    std::vector<long>& o = options[i];
    if (on_face) {
      if (mesh.periodic()) {
        o.push_back(((k % n) + n) % n);
        o.push_back(((k - 1) % n + n) % n);
      } else {
        if (k < n) o.push_back(k);
        if (k > 0) o.push_back(k - 1);
      }
    } else {
      o.push_back(mesh.periodic() ? ((k % n) + n) % n : std::clamp(k, 0L, n - 1));
    }
    t[i] = s;
  }
  Vector value = Vector::Zero(comps);
  Matrix grad = Matrix::Zero(comps, dim);
  int count = 0;
  std::vector<long> idx(static_cast<std::size_t>(dim));
  std::vector<std::size_t> pick(static_cast<std::size_t>(dim), 0);
  while (true) {
    for (int i = 0; i < dim; ++i) idx[i] = options[i][pick[i]];
    Index c = 0, stride = 1;
    for (int i = 0; i < dim; ++i) {
      c += idx[i] * stride;
      stride *= mesh.cells_per_axis()[i];
    }
    const auto nodes = mesh.cell_nodes(c);
    double xi[3];
    for (int i = 0; i < dim; ++i) {
      double local = t[i] - static_cast<double>(idx[i]);
      if (mesh.periodic() && local < -0.5) local += static_cast<double>(mesh.cells_per_axis()[i]);
      if (mesh.periodic() && local > 1.5) local -= static_cast<double>(mesh.cells_per_axis()[i]);
      xi[i] = local;
    }
    for (int a = 0; a < mesh.corners_per_cell(); ++a) {
      double phi = 1.0;
      double dphi[3];
      for (int i = 0; i < dim; ++i) phi *= ((a >> i) & 1) ? xi[i] : 1.0 - xi[i];
      for (int l = 0; l < dim; ++l) {
        double d = 1.0;
        for (int i = 0; i < dim; ++i)
          d *= (i == l) ? (((a >> i) & 1) ? 1.0 : -1.0) / mesh.spacing(i) : (((a >> i) & 1) ? xi[i] : 1.0 - xi[i]);
        dphi[l] = d;
      }
      for (int k = 0; k < comps; ++k) {
        const double u = full(nodes[a] * comps + k);
        if (count == 0) value(k) += phi * u;
        for (int l = 0; l < dim; ++l) grad(k, l) += dphi[l] * u;
      }
    }
    ++count;
    int i = 0;
    for (; i < dim; ++i) {
      if (++pick[i] < options[i].size()) break;
      pick[i] = 0;
    }
    if (i == dim) break;
  }
  return {value, grad / static_cast<double>(count)};
}

/// u0(x) + eps u1(x, x/eps) with u1 = u(grad u0)(y) + v(grad du0/dt)(y) at the
/// nodes of `fine`. Correctors vanish outside their phase, so the sum realizes
/// chi_1 u(.) + chi_2 v(.).
inline Vector reconstruct_two_scale(const EffectiveModel& m, const CellDomain& dom,
                                    const BoxMesh& macro, const Vector& u0, const Vector& u0_dot,
                                    const BoxMesh& fine, double epsilon) {
  const int dim = m.dimension;
  if (macro.dimension() != dim || fine.dimension() != dim)
    throw GridMismatch("reconstruct_two_scale: mesh dimensions differ from the model");
  if (u0.size() != macro.num_nodes() * dim || (u0_dot.size() != 0 && u0_dot.size() != u0.size()))
    throw GridMismatch("reconstruct_two_scale: macro field does not match the macro mesh");
  for (int i = 0; i < dim; ++i)
    if (std::abs(macro.lengths()[i] - fine.lengths()[i]) > 1e-12)
      throw GridMismatch("reconstruct_two_scale: macro and fine meshes cover different domains");
  Vector out(fine.num_nodes() * dim);
  for (Index n = 0; n < fine.num_nodes(); ++n) {
    const Point x = fine.node_coordinates(n);
    const auto [val, grad] = evaluate_field(macro, u0, dim, x);
    Point y(x);
    for (double& t : y) t /= epsilon;
    Vector u1 = Vector::Zero(dim);
    for (int l = 0; l < dim * dim && !m.elastic.empty(); ++l) {
      const double gl = grad(l / dim, l % dim);
      if (gl != 0.0) u1 += gl * evaluate_field(dom.mesh, m.elastic[l].values, dim, y).first;
    }
    if (u0_dot.size() && !m.stokes.empty()) {
      const Matrix gdot = evaluate_field(macro, u0_dot, dim, x).second;
      for (int l = 0; l < dim * dim; ++l) {
        const double gl = gdot(l / dim, l % dim);
        if (gl != 0.0) u1 += gl * evaluate_field(dom.mesh, m.stokes[l].values, dim, y).first;
      }
    }
    out.segment(n * dim, dim) = val + epsilon * u1;
  }
  return out;
}

}  // namespace aphom
