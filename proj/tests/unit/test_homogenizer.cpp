#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aphom/homogenizer/homogenizer.hpp"

using namespace aphom;

namespace {
constexpr double kPi = std::numbers::pi;

CellCoefficients constant_coefficients(int dim, double a0, double b0, double rho1 = 1.0,
                                       double rho2 = 1.0) {
  CellCoefficients c;
  c.A0 = MatrixField::scalar(dim, a0);
  c.B0 = MatrixField::scalar(dim, b0);
  c.A1 = MemoryKernel::zero(dim);
  c.B1 = MemoryKernel::zero(dim);
  c.rho1 = ScalarProfile::constant(dim, rho1);
  c.rho2 = ScalarProfile::constant(dim, rho2);
  return c;
}

double laminate_coefficient(int res) {
  auto g = build_cell(laminate_spec(1, 0, 0.5));
  auto dom = build_unit_cell_domain(g, res, true);
  auto co = constant_coefficients(1, 1.0, 1.0);
  co.A0_phase2 = MatrixField::scalar(1, 4.0);
  return assemble_effective(dom, co).C0(0, 0);
}

const CellDomain& disk_domain() {
  static const CellDomain d = build_unit_cell_domain(build_cell(disk_spec(2, 0.25)), 16);
  return d;
}

const EffectiveModel& disk_model() {
  static const EffectiveModel m = [] {
    CellSolveOptions o;
    o.threads = 4;
    return assemble_effective(disk_domain(), constant_coefficients(2, 1.0, 0.5, 2.0, 1.0), o);
  }();
  return m;
}
}  // namespace

TEST(ElasticCell, ZeroLoadGivesZeroCorrector) {
  auto co = constant_coefficients(2, 1.0, 1.0);
  auto u = solve_elastic_cell(disk_domain(), co, Matrix::Zero(2, 2));
  EXPECT_EQ(u.values.norm(), 0.0);
}

TEST(ElasticCell, LinearInLoad) {
  auto co = constant_coefficients(2, 1.0, 1.0);
  Matrix a(2, 2), b(2, 2);
  a << 1, 0.3, -0.2, 0.5;
  b << 0, 1, 2, -1;
  auto ua = solve_elastic_cell(disk_domain(), co, a);
  auto ub = solve_elastic_cell(disk_domain(), co, b);
  auto uab = solve_elastic_cell(disk_domain(), co, 2.0 * a - b);
  EXPECT_LT((uab.values - (2.0 * ua.values - ub.values)).norm(), 1e-8 * (1 + ua.values.norm()));
}

TEST(ElasticCell, ValidationOnlyGeometryRejected) {
  auto g = build_cell(laminate_spec(2, 0, 0.5));
  EXPECT_THROW(build_unit_cell_domain(g, 8), GeometryViolation);
}

TEST(ElasticCell, LaminateHarmonicMean) {
  // series springs: 1 / (0.5/1 + 0.5/4) = 1.6
  const double e64 = std::abs(laminate_coefficient(64) - 1.6);
  const double e128 = std::abs(laminate_coefficient(128) - 1.6);
  EXPECT_LT(e128, 0.016);
  EXPECT_LE(e128, e64 + 1e-12);
}

TEST(ElasticCell, ModesVanishForCoerciveKernel) {
  auto co = constant_coefficients(2, 1.0, 1.0);
  co.A1 = MemoryKernel::from_profile(MatrixField::scalar(2, 0.2), TrigPolynomial::cosine({2 * kPi}), 8);
  CellSolveOptions o;
  o.fast_time_modes = true;
  auto u = solve_elastic_cell(disk_domain(), co, Matrix::Identity(2, 2), o);
  ASSERT_EQ(u.modes.size(), 8u);
  for (std::size_t m = 1; m < u.modes.size(); ++m) EXPECT_EQ(u.modes[m].norm(), 0.0);
}

TEST(StokesCell, ConstantViscosityHasNoCorrector) {
  // v = 0 solves the cell problem exactly when B0 is constant
  auto co = constant_coefficients(2, 1.0, 0.5);
  Matrix xi(2, 2);
  xi << 0.3, 1, -0.4, 0.1;
  auto v = solve_stokes_cell(disk_domain(), co, xi);
  EXPECT_LT(v.values.norm(), 1e-12);
}

TEST(StokesCell, ShearLoadIsDivergenceFree) {
  auto co = constant_coefficients(2, 1.0, 0.5);
  co.B0.add(TrigPolynomial::cosine({2 * kPi, 0.0}, 0.25), Matrix::Identity(2, 2));
  Matrix xi(2, 2);
  xi << 0, 1, 0, 0;
  CellSolveOptions o;
  auto v = solve_stokes_cell(disk_domain(), co, xi, o);
  EXPECT_GT(v.values.norm(), 0.0);
  const Vector div = stokes_divergence(disk_domain(), co, v);
  EXPECT_LT(div.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(mean_fluid_divergence(disk_domain(), v), 0.0, 1e-8);
}

TEST(StokesCell, DilatationOnlyMovesThePressure) {
  auto co = constant_coefficients(2, 1.0, 0.5);
  auto v = solve_stokes_cell(disk_domain(), co, Matrix::Identity(2, 2));
  EXPECT_NEAR(mean_fluid_divergence(disk_domain(), v), 0.0, 1e-8);
}

TEST(Effective, DensityWeights) {
  const auto& m = disk_model();
  const double f1 = kPi / 16;
  EXPECT_NEAR(m.rho0, 2.0 * f1 + (1.0 - f1), 1e-3);
  EXPECT_NEAR(m.weight_f, 2.0 * f1, 1e-3);
  EXPECT_NEAR(m.solid_fraction + m.fluid_fraction, 1.0, 0.0);
}

TEST(Effective, UnitDensitiesWeighLoadsByOne) {
  auto co = constant_coefficients(2, 1.0, 1.0);
  const auto w = density_weights(disk_domain(), co);
  EXPECT_EQ(w[0] + w[1], 1.0);
}

TEST(Effective, StructureAndVoigtBound) {
  const auto& m = disk_model();
  const double scale = m.C0.norm() + m.C1.norm();
  EXPECT_LT((m.C0 - m.C0.transpose()).norm(), 1e-8 * scale);
  EXPECT_LT((m.C1 - m.C1.transpose()).norm(), 1e-8 * scale);
  const double solid_cells = static_cast<double>(disk_domain().mesh.count_phase(Phase::Solid)) /
                             static_cast<double>(disk_domain().mesh.num_cells());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  for (int t = 0; t < 100; ++t) {
    Vector xi = Vector::NullaryExpr(4, [&] { return d(rng); });
    const double c0 = xi.dot(m.C0 * xi);
    EXPECT_GE(c0, -1e-12);
    EXPECT_GE(xi.dot(m.C1 * xi), -1e-12);
    // zero corrector: M(chi_1 A0) = |Y1| for A0 = I, with chi_1 the mesh indicator
    EXPECT_LE(c0, solid_cells * xi.squaredNorm() * (1 + 1e-12));
  }
}

TEST(Effective, PressureResponseVanishes) {
  const auto& m = disk_model();
  EXPECT_LT(m.H.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Effective, EmptySkeletonNeedsValidationFlag) {
  auto g = build_cell(disk_spec(2, 0.25));
  auto theta = PoreDistribution::from_function({2, 2}, [](const LatticePoint&) { return 0; });
  theta.set_declared_period({1, 1});
  auto dom = build_cell_domain(g, theta, 8);
  auto co = constant_coefficients(2, 1.0, 1.0);
  EXPECT_THROW(assemble_effective(dom, co), PhaseError);
  CellSolveOptions o;
  o.single_phase_validation = true;
  auto m = assemble_effective(dom, co, o);
  EXPECT_EQ(m.C0.norm(), 0.0);
  // pure fluid: no corrector, C1 = B0
  EXPECT_NEAR((m.C1 - Matrix::Identity(4, 4)).norm(), 0.0, 1e-8);
}

TEST(Effective, SupercellMatchesUnitCellForPeriodOne) {
  auto g = build_cell(disk_spec(2, 0.25));
  auto theta = PoreDistribution::all_ones(2, 4);
  theta.set_declared_period({2, 1});
  auto big = build_cell_domain(g, theta, 8);
  auto small = build_unit_cell_domain(g, 8);
  auto co = constant_coefficients(2, 1.0, 0.5);
  auto a = assemble_effective(big, co);
  auto b = assemble_effective(small, co);
  EXPECT_LT((a.C0 - b.C0).norm(), 1e-7);
  EXPECT_LT((a.C1 - b.C1).norm(), 1e-7);
}

TEST(Effective, ReconstructionOfAffineField) {
  const auto& m = disk_model();
  BoxMesh macro({4, 4}, {1.0, 1.0}, false);
  BoxMesh fine({40, 40}, {1.0, 1.0}, false);
  Vector u0(macro.num_nodes() * 2);
  for (Index n = 0; n < macro.num_nodes(); ++n) {
    const Point x = macro.node_coordinates(n);
    u0(2 * n) = x[0];
    u0(2 * n + 1) = 0.0;
  }
  const Vector r = reconstruct_two_scale(m, disk_domain(), macro, u0, Vector(), fine, 0.25);
  // u0 + eps u(e_00)(x/eps): at lattice corners the corrector is clamped to zero
  const Point x = fine.node_coordinates(0);
  EXPECT_NEAR(r(0), x[0], 1e-12);
  double maxdiff = 0;
  for (Index n = 0; n < fine.num_nodes(); ++n) maxdiff = std::max(maxdiff, std::abs(r(2 * n) - fine.node_coordinates(n)[0]));
  EXPECT_GT(maxdiff, 0.0);
  EXPECT_THROW(reconstruct_two_scale(m, disk_domain(), macro, Vector::Zero(3), Vector(), fine, 0.25), GridMismatch);
}
