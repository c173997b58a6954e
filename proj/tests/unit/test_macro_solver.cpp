#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aphom/macro/macro_solver.hpp"

using namespace aphom;

namespace {
constexpr double kPi = std::numbers::pi;

EffectiveModel scalar_model(double c0, double c1, double rho0) {
  EffectiveModel m;
  m.dimension = 1;
  m.rho0 = rho0;
  m.weight_f = rho0;
  m.C0 = Matrix::Constant(1, 1, c0);
  m.C1 = Matrix::Constant(1, 1, c1);
  m.H = Vector::Zero(1);
  return m;
}

EffectiveModel plane_model(double c0, double c1, bool fluid) {
  EffectiveModel m;
  m.dimension = 2;
  m.rho0 = 1.0;
  m.weight_f = 0.4;
  m.weight_g = 0.6;
  m.C0 = c0 * Matrix::Identity(4, 4);
  m.C1 = c1 * Matrix::Identity(4, 4);
  m.H = Vector::Zero(4);
  if (fluid) m.stokes.resize(4);
  return m;
}

// Standing wave u = sin(pi x) sin(w t) / w on the interior nodes; the nodal sine
// is an eigenvector of the 1D Q1 stiffness and mass, so w_h is known in closed form.
double standing_wave_error(int steps) {
  const int cells = 32;
  const double c0 = 2.0, rho0 = 1.5, T = 1.0, dt = T / steps;
  BoxMesh mesh({cells}, {1.0}, false);
  auto op = assemble_macro_system(scalar_model(c0, 0.0, rho0), mesh);
  const double h = 1.0 / cells;
  const double lk = c0 / h * (2.0 - 2.0 * std::cos(kPi * h));
  const double lm = rho0 * h / 6.0 * (4.0 + 2.0 * std::cos(kPi * h));
  const double w = std::sqrt(lk / lm);
  MacroStepper st(op, dt);
  MacroState s = st.initial_state();
  Vector mode(op.size());
  for (Index i = 0; i < op.size(); ++i) mode(i) = std::sin(kPi * mesh.node_coordinates(op.dofs.full(i))[0]);
  s.v = mode;
  auto tr = solve_macro(op, zero_load(1), zero_load(1), T, dt, &s);
  const Vector exact = mode * std::sin(w * T) / w;
  return (tr.states.back().u - exact).cwiseAbs().maxCoeff();
}
}  // namespace

TEST(MacroSolver, ZeroLoadZeroTrajectory) {
  BoxMesh mesh({6, 6}, {1.0, 1.0}, false);
  for (bool fluid : {false, true}) {
    auto op = assemble_macro_system(plane_model(1.0, 0.5, fluid), mesh);
    auto tr = solve_macro(op, zero_load(2), zero_load(2), 0.5, 0.05);
    for (const auto& s : tr.states) {
      EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(s.v.cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(MacroSolver, OperatorStructure) {
  BoxMesh mesh({5, 4}, {1.0, 1.0}, false);
  auto op = assemble_macro_system(plane_model(1.0, 0.0, false), mesh);
  EXPECT_LT(Matrix(op.K - Matrix(op.K).transpose()).norm(), 1e-12);
  EXPECT_LT(Matrix(op.M - Matrix(op.M).transpose()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(op.M)};
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  // identity tensor: vector Laplacian stiffness
  const SparseMatrix lap = op.dofs.reduce(
      lift_to_vector(assemble_scalar_laplacian_full(mesh, [](Index) { return 1.0; }, full_mask(mesh)), 2));
  EXPECT_LT(Matrix(op.K - lap).norm(), 1e-12);
}

TEST(MacroSolver, CouplingLinearInH) {
  BoxMesh mesh({4, 4}, {1.0, 1.0}, false);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  auto m1 = plane_model(1.0, 0.5, false), m2 = m1, m3 = m1;
  m1.H = Vector::NullaryExpr(4, [&] { return d(rng); });
  m2.H = Vector::NullaryExpr(4, [&] { return d(rng); });
  m3.H = 2.0 * m1.H - 3.0 * m2.H;
  auto p1 = assemble_macro_system(m1, mesh).P, p2 = assemble_macro_system(m2, mesh).P,
       p3 = assemble_macro_system(m3, mesh).P;
  EXPECT_LT(Matrix(p3 - (2.0 * p1 - 3.0 * p2)).norm(), 1e-12);
}

TEST(MacroSolver, LoadWeightsSumForUnitDensities) {
  BoxMesh mesh({4, 4}, {1.0, 1.0}, false);
  auto m = plane_model(1.0, 0.5, false);
  m.weight_f = 0.3;
  m.weight_g = 0.7;
  auto op = assemble_macro_system(m, mesh);
  LoadField one = [](const Point&, double) { return Vector(Vector::Unit(2, 0)); };
  const Vector a = macro_load(op, one, one, 0.0);
  const Vector b = op.Munit * Vector(Vector::Ones(mesh.num_nodes() * 2).cwiseProduct(
                                  Vector::NullaryExpr(mesh.num_nodes() * 2, [](Index i) { return i % 2 == 0 ? 1.0 : 0.0; })));
  EXPECT_LT((a - b).norm(), 1e-15);
}

TEST(MacroSolver, StandingWavePhaseSecondOrder) {
  std::vector<double> e;
  for (int steps : {20, 40, 80, 160}) e.push_back(standing_wave_error(steps));
  for (std::size_t i = 0; i + 1 < e.size(); ++i) EXPECT_GT(std::log2(e[i] / e[i + 1]), 1.9);
}

TEST(MacroSolver, ManufacturedForcingSecondOrder) {
  // u = sin(pi x) t^2 (1 - t) -> f = rho0 u'' + c0 pi^2 u on the continuous level;
  // reference: the same scheme on the semi-discrete modal ODE, solved exactly by eigen-projection
  const int cells = 16;
  const double c0 = 1.0, rho0 = 1.0, T = 1.0;
  BoxMesh mesh({cells}, {1.0}, false);
  auto op = assemble_macro_system(scalar_model(c0, 0.1, rho0), mesh);
  LoadField f = [&](const Point& x, double t) {
    const double s = std::sin(kPi * x[0]);
    return Vector(Vector::Constant(1, s * (rho0 * (2 - 6 * t) + 0.1 * kPi * kPi * (2 * t - 3 * t * t) +
                                           c0 * kPi * kPi * t * t * (1 - t))));
  };
  auto run = [&](int steps) { return solve_macro(op, f, zero_load(1), T, T / steps).states.back().u; };
  const Vector ref = run(2560);
  std::vector<double> e;
  for (int steps : {10, 20, 40, 80}) e.push_back((run(steps) - ref).norm());
  for (std::size_t i = 0; i + 1 < e.size(); ++i) EXPECT_GT(std::log2(e[i] / e[i + 1]), 1.9);
}

TEST(MacroSolver, EnergyBalanceAndDecay) {
  BoxMesh mesh({8, 8}, {1.0, 1.0}, false);
  for (bool fluid : {false, true}) {
    auto op = assemble_macro_system(plane_model(1.0, 0.2, fluid), mesh);
    LoadField pulse = [](const Point& x, double t) {
      Vector v(2);
      v << std::sin(kPi * x[0]) * std::sin(2 * kPi * x[1]), std::cos(kPi * x[1]) * x[0];
      return Vector(t < 0.2 ? Vector(v * std::sin(5 * kPi * t)) : Vector(Vector::Zero(2)));
    };
    auto tr = solve_macro(op, pulse, pulse, 1.0, 0.01);
    double scale = 0;
    for (const auto& e : tr.energy) scale = std::max(scale, e.work);
    ASSERT_GT(scale, 0.0);
    for (const auto& e : tr.energy) EXPECT_LT(std::abs(e.residual()), 1e-6 * scale);
    // free decay after the pulse
    for (std::size_t i = 21; i + 1 < tr.energy.size(); ++i)
      EXPECT_LE(tr.energy[i + 1].kinetic + tr.energy[i + 1].elastic,
                (tr.energy[i].kinetic + tr.energy[i].elastic) * (1 + 1e-12));
    if (fluid) {
      // incompressibility up to the O(h^2) stabilization, against the free run
      MacroOptions free;
      free.incompressible = 0;
      auto op_free = assemble_macro_system(plane_model(1.0, 0.2, true), mesh, free);
      auto tr_free = solve_macro(op_free, pulse, pulse, 1.0, 0.01);
      const Vector div = op.B * tr.states[20].v;
      const Vector div_free = op.B * tr_free.states[20].v;
      EXPECT_LT(div.norm(), 0.05 * div_free.norm());
    }
  }
}

TEST(MacroSolver, StaticSpatialSecondOrder) {
  // -c0 u'' = c0 pi^2 sin(pi x): u = sin(pi x)
  std::vector<double> e;
  for (int cells : {8, 16, 32, 64}) {
    BoxMesh mesh({cells}, {1.0}, false);
    auto op = assemble_macro_system(scalar_model(2.0, 0.0, 1.0), mesh);
    LoadField f = [](const Point& x, double) { return Vector(Vector::Constant(1, 2.0 * kPi * kPi * std::sin(kPi * x[0]))); };
    const Vector u = solve_macro_static(op, macro_load(op, f, zero_load(1), 0.0));
    Vector exact(op.size());
    for (Index i = 0; i < op.size(); ++i) exact(i) = std::sin(kPi * mesh.node_coordinates(op.dofs.full(i))[0]);
    e.push_back(macro_l2(op, u - exact));
  }
  for (std::size_t i = 0; i + 1 < e.size(); ++i) EXPECT_GT(std::log2(e[i] / e[i + 1]), 1.9);
}
