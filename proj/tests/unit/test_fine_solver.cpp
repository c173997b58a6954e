#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aphom/fine/fine_solver.hpp"
#include "aphom/homogenizer/homogenizer.hpp"

using namespace aphom;

namespace {
constexpr double kPi = std::numbers::pi;

CellCoefficients coefficients(double a0, double b0, double rho1, double rho2) {
  CellCoefficients c;
  c.A0 = MatrixField::scalar(2, a0);
  c.B0 = MatrixField::scalar(2, b0);
  c.A1 = MemoryKernel::zero(2);
  c.B1 = MemoryKernel::zero(2);
  c.rho1 = ScalarProfile::constant(2, rho1);
  c.rho2 = ScalarProfile::constant(2, rho2);
  return c;
}

EpsilonDomain disk_domain(double eps, int res) {
  return build_epsilon_domain({1.0, 1.0}, eps, PoreDistribution::all_ones(2), build_cell(disk_spec(2, 0.25)), res);
}

LoadField swirl() {
  return [](const Point& x, double t) {
    Vector v(2);
    v << std::sin(kPi * x[1]), -std::sin(kPi * x[0]) * (1 + x[1]);
    return Vector(v * std::sin(2 * kPi * t));
  };
}
}  // namespace

TEST(FineSolver, EmptySkeletonRejected) {
  auto theta = PoreDistribution::from_function({2, 2}, [](const LatticePoint&) { return 0; });
  theta.set_declared_period({1, 1});
  auto dom = build_epsilon_domain({1.0, 1.0}, 0.25, theta, build_cell(disk_spec(2, 0.25)), 4);
  auto co = coefficients(1, 1, 1, 1);
  EXPECT_THROW(assemble_fine_operators(dom, co), PhaseError);
  FineOptions o;
  o.single_phase_validation = true;
  auto op = assemble_fine_operators(dom, co, o);
  auto tr = solve_fine(op, swirl(), swirl(), 0.2, 0.05);
  EXPECT_GT(tr.states.back().v.norm(), 0.0);
}

TEST(FineSolver, OperatorSymmetry) {
  auto dom = disk_domain(0.25, 4);
  auto op = assemble_fine_operators(dom, coefficients(2, 1, 3, 1));
  for (const SparseMatrix* m : {&op.M, &op.K, &op.D}) {
    const SparseMatrix t = m->transpose();
    EXPECT_LT((*m - t).norm(), 1e-12 * m->norm());
  }
}

TEST(FineSolver, TotalMassApproachesEffectiveDensity) {
  auto co = coefficients(1, 1, 3.0, 1.0);
  const double rho0 = 3.0 * kPi / 16 + (1 - kPi / 16);
  auto total_mass = [&](double eps, int res) {
    auto dom = disk_domain(eps, res);
    auto op = assemble_fine_operators(dom, co);
    double total = 0;
    for (double r : op.cell_density) total += r * dom.mesh.cell_volume();
    return total;
  };
  for (int res : {16, 32}) {
    // voxel area error: at most perimeter x cell width, times the density jump
    const double bound = 2.0 * (2 * kPi * 0.25) / res;
    const double e4 = std::abs(total_mass(0.25, res) - rho0);
    const double e8 = std::abs(total_mass(0.125, res) - rho0);
    EXPECT_LT(e4, bound);
    EXPECT_NEAR(e4, e8, 1e-12);
  }
  EXPECT_LT(std::abs(total_mass(0.25, 64) - rho0), std::abs(total_mass(0.25, 16) - rho0));
}

TEST(FineSolver, ZeroLoadZeroTrajectory) {
  auto dom = disk_domain(0.25, 4);
  auto op = assemble_fine_operators(dom, coefficients(1, 1, 1, 1));
  auto tr = solve_fine(op, zero_load(2), zero_load(2), 0.5, 0.05);
  for (const auto& s : tr.states) {
    EXPECT_EQ(s.u.norm(), 0.0);
    EXPECT_EQ(s.pressure.norm(), 0.0);
  }
}

TEST(FineSolver, CausalUntilFirstLoad) {
  auto dom = disk_domain(0.25, 4);
  auto op = assemble_fine_operators(dom, coefficients(1, 1, 1, 1));
  LoadField late = [](const Point& x, double t) {
    return Vector(t > 0.3 ? Vector(Vector::Constant(2, x[0] * (t - 0.3))) : Vector(Vector::Zero(2)));
  };
  auto tr = solve_fine(op, late, late, 0.5, 0.05);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    if (tr.states[i].time() < 0.3 - 1e-12)
      EXPECT_EQ(tr.states[i].u.norm(), 0.0);
  }
  EXPECT_GT(tr.states.back().u.norm(), 0.0);
}

TEST(FineSolver, EnergyIdentityAndConstraint) {
  auto dom = disk_domain(0.25, 8);
  auto co = coefficients(2, 0.5, 2, 1);
  co.A1 = MemoryKernel::from_profile(MatrixField::scalar(2, 0.3), TrigPolynomial::cosine({2 * kPi}, 0.5) +
                                                                    TrigPolynomial::constant(1, 0.5));
  co.B1 = MemoryKernel::from_profile(MatrixField::scalar(2, 0.1), TrigPolynomial::cosine({2 * kPi}));
  auto op = assemble_fine_operators(dom, co);
  const double dt = 0.25 / 8;
  auto tr = solve_fine(op, swirl(), swirl(), 0.5, dt);
  const auto r = energy_report(tr);
  EXPECT_LT(r.max_identity_residual, 1e-6);
  EXPECT_LT(r.max_constraint_residual, 1e-6);
  for (double q : r.quantities()) EXPECT_GT(q, 0.0);
  EXPECT_THROW(solve_fine(op, swirl(), swirl(), 0.5, 2 * dt), GridMismatch);
}

TEST(FineSolver, EnergyReportOfZeroTrajectory) {
  FineTrajectory tr;
  tr.energy.resize(4);
  for (double q : energy_report(tr).quantities()) EXPECT_EQ(q, 0.0);
}

// Independent dense reference: element matrices from the Q1 element, the same
// trapezoidal scheme with lagged memory, and a dense LU per step.
TEST(FineSolver, MatchesDenseReference) {
  auto dom = disk_domain(0.25, 4);
  auto co = coefficients(2.0, 0.7, 1.5, 1.0);
  co.A1 = MemoryKernel::from_profile(MatrixField::scalar(2, 0.4), TrigPolynomial::cosine({2 * kPi}));
  co.B1 = MemoryKernel::from_profile(MatrixField::scalar(2, 0.2), TrigPolynomial::sine({2 * kPi}));
  auto op = assemble_fine_operators(dom, co);
  const double dt = 0.25 / 8, T = 0.25;
  const int steps = 8;
  auto tr = solve_fine(op, swirl(), swirl(), T, dt);

  const BoxMesh& mesh = dom.mesh;
  const Q1Element el(mesh);
  const int nn = static_cast<int>(mesh.num_nodes()), nl = el.num_local();
  Matrix M = Matrix::Zero(2 * nn, 2 * nn), K = M, D = M, K1 = M, D1 = M, Mf = M, Mg = M;
  Matrix B = Matrix::Zero(nn, 2 * nn), S = Matrix::Zero(nn, nn);
  std::vector<char> pnode(nn, 0);
  const double h = mesh.spacing(0);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const bool solid = mesh.phase(c) == Phase::Solid;
    const auto nodes = mesh.cell_nodes(c);
    const double rho = solid ? 1.5 : 1.0;
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < nl; ++b)
        for (int k = 0; k < 2; ++k) {
          const Index i = nodes[a] * 2 + k, j = nodes[b] * 2 + k;
          const double g = el.stiffness(0, 0)(a, b) + el.stiffness(1, 1)(a, b);
          M(i, j) += rho * el.mass()(a, b);
          (solid ? Mf : Mg)(i, j) += rho * el.mass()(a, b);
          if (solid) {
            K(i, j) += 2.0 * g;
            K1(i, j) += 0.4 * g;
          } else {
            D(i, j) += 0.7 * g;
            D1(i, j) += 0.2 * g;
          }
        }
    if (!solid) {
      const double w = 0.1 * h * h / (rho * h * h + 0.5 * dt * 0.7);
      for (int a = 0; a < nl; ++a) {
        pnode[nodes[a]] = 1;
        for (int b = 0; b < nl; ++b) {
          S(nodes[a], nodes[b]) += w * el.laplacian()(a, b);
          for (int m = 0; m < 2; ++m) B(nodes[a], nodes[b] * 2 + m) -= el.weak_gradient(m)(a, b);
        }
      }
    }
  }
  std::vector<int> vf, pf;
  for (int n = 0; n < nn; ++n) {
    if (!mesh.is_boundary_vertex(mesh.vertex_of_node(n))) {
      vf.push_back(2 * n);
      vf.push_back(2 * n + 1);
    }
    if (pnode[n]) pf.push_back(n);
  }
  const int nv = static_cast<int>(vf.size()), np = static_cast<int>(pf.size());
  auto sub = [](const Matrix& a, const std::vector<int>& r, const std::vector<int>& c) {
    Matrix s(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) s(i, j) = a(r[i], c[j]);
    return s;
  };
  const Matrix m = sub(M, vf, vf), k = sub(K, vf, vf), d = sub(D, vf, vf), k1 = sub(K1, vf, vf), d1 = sub(D1, vf, vf);
  const Matrix b = sub(B, pf, vf), s = sub(S, pf, pf);
  Matrix sys = Matrix::Zero(nv + np, nv + np);
  sys.topLeftCorner(nv, nv) = m + 0.5 * dt * d + 0.25 * dt * dt * k;
  sys.topRightCorner(nv, np) = b.transpose();
  sys.bottomLeftCorner(np, nv) = b;
  sys.bottomRightCorner(np, np) = -2.0 * s;
  const Eigen::FullPivLU<Matrix> lu(sys);
  auto load = [&](double t) {
    Vector nodal(2 * nn);
    for (int n = 0; n < nn; ++n) nodal.segment(2 * n, 2) = swirl()(mesh.node_coordinates(n), t);
    const Vector full = (Mf + Mg) * nodal;
    Vector r(nv);
    for (int i = 0; i < nv; ++i) r(i) = full(vf[i]);
    return r;
  };
  auto qa = [&](double t) { return std::cos(2 * kPi * t / 0.25); };
  auto qb = [&](double t) { return std::sin(2 * kPi * t / 0.25); };
  std::vector<Vector> us{Vector::Zero(nv)}, vs{Vector::Zero(nv)};
  // trapezoid at step n over the stored history; `lag` replaces g_n by g_{n-1}
  auto conv = [&](const std::function<double(double)>& q, const std::vector<Vector>& g, int n, bool lag) {
    Vector out = Vector::Zero(nv);
    if (n == 0) return out;
    out += 0.5 * q(n * dt) * g[0];
    for (int j = 1; j < n; ++j) out += q((n - j) * dt) * g[j];
    out += 0.5 * q(0) * g[lag ? n - 1 : n];
    return Vector(dt * out);
  };
  for (int n = 0; n < steps; ++n) {
    const Vector mem_n = k1 * conv(qa, us, n, false) + d1 * conv(qb, vs, n, false);
    const Vector mem_np1 = k1 * conv(qa, us, n + 1, true) + d1 * conv(qb, vs, n + 1, true);
    const Vector fbar = 0.5 * (load(n * dt) + load((n + 1) * dt)) - 0.5 * (mem_n + mem_np1);
    Vector rhs(nv + np);
    rhs.head(nv) = dt * fbar + m * vs[n] - 0.5 * dt * d * vs[n] - dt * k * us[n] - 0.25 * dt * dt * k * vs[n];
    rhs.tail(np) = -b * vs[n];
    const Vector x = lu.solve(rhs);
    vs.push_back(x.head(nv));
    us.push_back(us[n] + 0.5 * dt * (vs[n] + vs[n + 1]));
  }
  const double scale = us.back().norm();
  ASSERT_GT(scale, 0.0);
  EXPECT_LT((tr.states.back().u - us.back()).norm(), 1e-8 * scale);
  EXPECT_LT((tr.states.back().v - vs.back()).norm(), 1e-8 * vs.back().norm());
}
