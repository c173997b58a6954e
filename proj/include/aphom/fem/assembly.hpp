#pragma once

#include <algorithm>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"
#include "aphom/fem/q1_element.hpp"
#include "aphom/fem/sparse_operator.hpp"
#include "aphom/geometry/mesh.hpp"

namespace aphom {

/// Per-cell N^2 x N^2 coefficient acting on flattened gradients.
using TensorField = std::function<Matrix(Index cell)>;
using ScalarField = std::function<double(Index cell)>;
/// Cells taking part in an integral.
using CellMask = std::vector<char>;

inline CellMask phase_mask(const BoxMesh& mesh, Phase p) {
  CellMask m(static_cast<std::size_t>(mesh.num_cells()));
  for (Index c = 0; c < mesh.num_cells(); ++c) m[static_cast<std::size_t>(c)] = mesh.phase(c) == p;
  return m;
}

inline CellMask full_mask(const BoxMesh& mesh) {
  return CellMask(static_cast<std::size_t>(mesh.num_cells()), 1);
}

inline bool mask_empty(const CellMask& m) {
  return std::none_of(m.begin(), m.end(), [](char c) { return c != 0; });
}

/// Nodes belonging to at least one masked cell.
inline std::vector<char> nodes_of(const BoxMesh& mesh, const CellMask& mask) {
  std::vector<char> out(static_cast<std::size_t>(mesh.num_nodes()), 0);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (!mask[static_cast<std::size_t>(c)]) continue;
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < mesh.corners_per_cell(); ++a) out[static_cast<std::size_t>(nodes[a])] = 1;
  }
  return out;
}

/// Nodes on the outer boundary of a non-periodic mesh.
inline std::vector<char> boundary_nodes(const BoxMesh& mesh) {
  std::vector<char> out(static_cast<std::size_t>(mesh.num_nodes()), 0);
  if (mesh.periodic()) return out;
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v)) out[static_cast<std::size_t>(mesh.node_of_vertex(v))] = 1;
  return out;
}

/// Masked cells form one face-connected component (periodic wrap on periodic meshes).
inline bool mask_connected(const BoxMesh& mesh, const CellMask& mask) {
  const Index n = mesh.num_cells();
  Index start = -1, count = 0;
  for (Index c = 0; c < n; ++c)
    if (mask[static_cast<std::size_t>(c)]) {
      if (start < 0) start = c;
      ++count;
    }
  if (start < 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Index> queue;
  queue.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  Index reached = 1;
  const auto& cells = mesh.cells_per_axis();
  while (!queue.empty()) {
    const Index c = queue.front();
    queue.pop();
    const auto idx = mesh.cell_multi_index(c);
    for (int axis = 0; axis < mesh.dimension(); ++axis)
      for (int step : {-1, 1}) {
        auto nb = idx;
        nb[axis] += step;
        if (nb[axis] < 0 || nb[axis] >= cells[axis]) {
          if (!mesh.periodic()) continue;
          nb[axis] = (nb[axis] + cells[axis]) % cells[axis];
        }
        Index id = 0, stride = 1;
        for (std::size_t i = 0; i < nb.size(); ++i) {
          id += nb[i] * stride;
          stride *= cells[i];
        }
        if (!mask[static_cast<std::size_t>(id)] || seen[static_cast<std::size_t>(id)]) continue;
        seen[static_cast<std::size_t>(id)] = 1;
        ++reached;
        queue.push(id);
      }
  }
  return reached == count;
}

/// Smallest eigenvalue of the symmetric part; CoercivityViolation when not positive.
inline double check_coercive(const Matrix& c, const std::string& where) {
  const Matrix sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (!(lmin > 1e-13 * scale))
    throw CoercivityViolation(where + ": coefficient is not uniformly elliptic (smallest "
                              "eigenvalue " + std::to_string(lmin) + ")");
  return lmin;
}

namespace detail {

template <typename F>
void for_masked_cells(const BoxMesh& mesh, const CellMask* mask, F&& f) {
  for (Index c = 0; c < mesh.num_cells(); ++c)
    if (!mask || (*mask)[static_cast<std::size_t>(c)]) f(c);
}

inline SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet>& t) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace detail

/// Full-space stiffness  (w, z) -> int_mask C grad w : grad z  on interleaved vector unknowns.
/// With `check` set every masked coefficient sample must be coercive.
inline SparseMatrix assemble_vector_elliptic_full(const BoxMesh& mesh, const TensorField& coeff,
                                                  const CellMask& mask, bool check = true) {
  const Q1Element el(mesh);
  const int dim = mesh.dimension(), nloc = el.num_local();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(mesh.num_cells()) * nloc * nloc * dim * dim);
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const Matrix cv = coeff(c);
    if (check) check_coercive(cv, "assemble_vector_elliptic (cell " + std::to_string(c) + ")");
    const Matrix ke = el.vector_stiffness(cv);
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < nloc; ++a)
      for (int k = 0; k < dim; ++k)
        for (int b = 0; b < nloc; ++b)
          for (int m = 0; m < dim; ++m) {
            const double v = ke(a * dim + k, b * dim + m);
            if (v != 0.0)
              t.emplace_back(static_cast<int>(nodes[a] * dim + k), static_cast<int>(nodes[b] * dim + m), v);
          }
  });
  const Index n = mesh.num_nodes() * dim;
  return detail::from_triplets(n, n, t);
}

/// Stiffness restricted to the free unknowns of `dofs`.
inline SparseOperator assemble_vector_elliptic(const BoxMesh& mesh, const TensorField& coeff,
                                               const CellMask& mask, const DofMap& dofs) {
  SparseOperator op;
  op.matrix = dofs.reduce(assemble_vector_elliptic_full(mesh, coeff, mask));
  op.symmetric = op.asymmetry() < 1e-12 * std::max(1.0, op.matrix.coeffs().cwiseAbs().maxCoeff());
  return op;
}

/// Scalar mass  int_mask rho phi_a phi_b  on nodes.
inline SparseMatrix assemble_scalar_mass_full(const BoxMesh& mesh, const ScalarField& rho,
                                              const CellMask& mask) {
  const Q1Element el(mesh);
  const int nloc = el.num_local();
  std::vector<Triplet> t;
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const double r = rho(c);
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b)
        t.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]), r * el.mass()(a, b));
  });
  return detail::from_triplets(mesh.num_nodes(), mesh.num_nodes(), t);
}

/// Scalar Laplacian  int_mask w grad phi_a . grad phi_b  on nodes.
inline SparseMatrix assemble_scalar_laplacian_full(const BoxMesh& mesh, const ScalarField& w,
                                                   const CellMask& mask) {
  const Q1Element el(mesh);
  const Matrix lap = el.laplacian();
  const int nloc = el.num_local();
  std::vector<Triplet> t;
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const double s = w(c);
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b)
        t.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]), s * lap(a, b));
  });
  return detail::from_triplets(mesh.num_nodes(), mesh.num_nodes(), t);
}

/// Scalar node operator lifted to interleaved vector unknowns, one copy per component.
inline SparseMatrix lift_to_vector(const SparseMatrix& s, int dim) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(s.nonZeros() * dim));
  for (int k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it)
      for (int c = 0; c < dim; ++c)
        t.emplace_back(static_cast<int>(it.row() * dim + c), static_cast<int>(it.col() * dim + c), it.value());
  return detail::from_triplets(s.rows() * dim, s.cols() * dim, t);
}

/// Divergence pairing  B[a, (b,m)] = -int_mask phi_a d_m phi_b  (pressure nodes x vector unknowns).
inline SparseMatrix assemble_divergence_full(const BoxMesh& mesh, const CellMask& mask) {
  const Q1Element el(mesh);
  const int dim = mesh.dimension(), nloc = el.num_local();
  std::vector<Triplet> t;
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b)
        for (int m = 0; m < dim; ++m)
          t.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b] * dim + m),
                         -el.weak_gradient(m)(a, b));
  });
  return detail::from_triplets(mesh.num_nodes(), mesh.num_nodes() * dim, t);
}

/// Load of a per-cell constant stress field: (b,k) -> -int_mask sigma_(k,l) d_l phi_b.
inline Vector assemble_stress_load_full(const BoxMesh& mesh, const std::function<Vector(Index)>& sigma,
                                        const CellMask& mask) {
  const Q1Element el(mesh);
  const int dim = mesh.dimension(), nloc = el.num_local();
  Vector f = Vector::Zero(mesh.num_nodes() * dim);
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const Vector fe = el.stress_load(sigma(c));
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < nloc; ++a)
      for (int k = 0; k < dim; ++k) f(nodes[a] * dim + k) += fe(a * dim + k);
  });
  return f;
}

/// int_mask phi_a for every node.
inline Vector assemble_basis_integrals(const BoxMesh& mesh, const CellMask& mask) {
  const Q1Element el(mesh);
  Vector w = Vector::Zero(mesh.num_nodes());
  detail::for_masked_cells(mesh, &mask, [&](Index c) {
    const auto nodes = mesh.cell_nodes(c);
    for (int a = 0; a < el.num_local(); ++a) w(nodes[a]) += el.basis_integral()(a);
  });
  return w;
}

/// Per-cell gradient (flattened, at the cell center) of a nodal vector field.
inline Vector cell_gradient(const BoxMesh& mesh, const Q1Element& el, const Vector& u_full, Index c) {
  const int dim = mesh.dimension();
  const auto nodes = mesh.cell_nodes(c);
  Vector g = Vector::Zero(dim * dim);
  // average over quadrature points equals the center value for Q1
  for (int q = 0; q < el.num_quadrature(); ++q)
    for (int a = 0; a < el.num_local(); ++a)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l)
          g(k * dim + l) += u_full(nodes[a] * dim + k) * el.grad(q, a, l) / el.num_quadrature();
  return g;
}

/// Saddle-point blocks of a Stokes-type problem on the masked (fluid) cells.
struct StokesBlocks {
  DofMap velocity;   // vector unknowns, Dirichlet on nodes touching unmasked cells
  DofMap pressure;   // scalar unknowns on nodes of masked cells
  SparseMatrix A;    // viscous block (reduced)
  SparseMatrix B;    // -int q div v (reduced)
  SparseMatrix S;    // pressure stabilization (reduced)
  SparseMatrix Mp;   // pressure mass (reduced)
  Vector pressure_weights;  // int_mask phi_a on free pressure nodes
  double delta = 0.0;
};

/// Equal-order Q1/Q1 Stokes blocks with pressure stabilization
///   S = delta h^2 / nu  int grad p . grad q,   nu = mean viscosity eigenvalue per cell.
/// `extra_dirichlet` adds velocity Dirichlet nodes, e.g. an outer no-slip wall.
inline StokesBlocks assemble_stokes(const BoxMesh& mesh, const TensorField& viscosity,
                                    const CellMask& fluid, double delta = 0.1,
                                    const std::vector<char>* extra_dirichlet = nullptr) {
  if (mask_empty(fluid)) throw PhaseError("assemble_stokes: the fluid phase is empty");
  if (!mask_connected(mesh, fluid)) throw PhaseError("assemble_stokes: the fluid phase is disconnected");
  const int dim = mesh.dimension();
  CellMask other(fluid.size());
  for (std::size_t i = 0; i < fluid.size(); ++i) other[i] = !fluid[i];
  auto vel_fixed = nodes_of(mesh, other);
  if (extra_dirichlet)
    for (std::size_t i = 0; i < vel_fixed.size(); ++i) vel_fixed[i] |= (*extra_dirichlet)[i];
  const auto p_nodes = nodes_of(mesh, fluid);
  std::vector<char> p_fixed(p_nodes.size());
  for (std::size_t i = 0; i < p_nodes.size(); ++i) p_fixed[i] = !p_nodes[i];

  StokesBlocks s;
  s.delta = delta;
  s.velocity = DofMap(mesh.num_nodes(), dim, vel_fixed);
  s.pressure = DofMap(mesh.num_nodes(), 1, p_fixed);
  if (s.velocity.size() == 0) throw PhaseError("assemble_stokes: no free velocity unknowns");
  s.A = s.velocity.reduce(assemble_vector_elliptic_full(mesh, viscosity, fluid));
  s.B = s.pressure.reduce(assemble_divergence_full(mesh, fluid), s.velocity);
  double hmax = 0.0;
  for (int i = 0; i < dim; ++i) hmax = std::max(hmax, mesh.spacing(i));
  auto stab = [&](Index c) {
    const Matrix v = viscosity(c);
    const double nu = v.trace() / static_cast<double>(v.rows());
    return delta * hmax * hmax / nu;
  };
  s.S = s.pressure.reduce(assemble_scalar_laplacian_full(mesh, stab, fluid));
  s.Mp = s.pressure.reduce(assemble_scalar_mass_full(mesh, [](Index) { return 1.0; }, fluid));
  s.pressure_weights = s.pressure.restrict(assemble_basis_integrals(mesh, fluid));
  return s;
}

/// Subtract the weighted mean: sum_i w_i p_i = 0 afterwards.
inline void remove_weighted_mean(Vector& p, const Vector& w) {
  const double wsum = w.sum();
  if (wsum > 0.0) p.array() -= w.dot(p) / wsum;
}

}  // namespace aphom
