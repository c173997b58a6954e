#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "aphom/aphom.hpp"

using namespace aphom;

#ifndef APHOM_CONFIG_DIR
#define APHOM_CONFIG_DIR "configs"
#endif

namespace {
constexpr double kPi = std::numbers::pi;

std::string config_path(const std::string& name) { return std::string(APHOM_CONFIG_DIR) + "/" + name; }

const char* kMinimal = R"(name: minimal
dimension: 2
geometry: {shape: disk, radius: 0.25}
coefficients:
  A0: 10
  B0: 1
)";

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("aphom_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}
}  // namespace

TEST(Config, ShippedConfigsParseAndRoundTrip) {
  for (const char* name : {"laminate_1d.yaml", "disk_density.yaml", "disk_memory.yaml", "converge_disk.yaml",
                           "converge_contrast1.yaml"}) {
    const SimConfig c = load_config(config_path(name));
    const std::string canon = serialize_config(c);
    EXPECT_EQ(serialize_config(parse_config(canon)), canon) << name;
  }
}

TEST(Config, NormalizeIsIdempotent) {
  const std::string once = normalize_config(kMinimal);
  EXPECT_EQ(normalize_config(once), once);
}

TEST(Config, ShorthandsExpandToTerms) {
  const SimConfig c = parse_config(std::string(kMinimal) + R"(loads:
  f:
    - direction: [1, 0]
      space: {factors: [[{sin: [pi, 0]}], [{cos: [0, 2*pi]}]]}
      time: [{constant: 2}]
)");
  const LoadField f = c.f.field(2);
  const Point x{0.3, 0.2};
  const Vector v = f(x, 0.0);
  EXPECT_NEAR(v(0), 2.0 * std::sin(kPi * 0.3) * std::cos(2 * kPi * 0.2), 1e-14);
  EXPECT_EQ(v(1), 0.0);
}

TEST(Config, PiExpressions) {
  const std::string text = R"(dimension: 1
geometry: {shape: laminate, axis: 0, thickness: 0.5}
validation: true
coefficients:
  A0: [{matrix: 1, profile: [{constant: 1}, {cos: [pi/2], amplitude: 0.1}, {cos: [-3pi], amplitude: 0.1}]}]
  A0_phase2: 4
  B0: 1
)";
  const SimConfig d = parse_config(text);
  for (double y : {0.1, 0.37, 0.8}) {
    const double expect = 1.0 + 0.1 * std::cos(kPi / 2 * y) + 0.1 * std::cos(3 * kPi * y);
    const double yy[1] = {y};
    EXPECT_NEAR(d.coefficients.A0(yy)(0, 0), expect, 1e-14);
  }
}

TEST(Config, MalformedFrequencyNamesFieldAndLine) {
  const std::string text = R"(dimension: 2
geometry: {shape: disk, radius: 0.25}
coefficients:
  A0:
    - matrix: 1
      profile:
        - {frequency: [1, oops], amplitude: 1}
  B0: 1
)";
  EXPECT_EQ(error_field(text), "coefficients.A0[0].profile[0].frequency[1]");
  EXPECT_EQ(error_line(text), 7);
}

TEST(Config, Diagnostics) {
  EXPECT_EQ(error_field("dimension: 2\ngeometry: {shape: hexagon}\ncoefficients: {A0: 1, B0: 1}\n"), "geometry.shape");
  EXPECT_EQ(error_field(std::string(kMinimal) + "colour: blue\n"), "colour");
  EXPECT_EQ(error_line(std::string(kMinimal) + "colour: blue\n"), 7);
  EXPECT_EQ(error_field("dimension: 2\ngeometry: {shape: disk, radius: 0.25}\ncoefficients: {A0: -1, B0: 1}\n"),
            "coefficients.A0");
  EXPECT_EQ(error_field("dimension: 2\ngeometry: {shape: disk, radius: 0.25}\ncoefficients: {A0: 1, B0: 1, rho2: -1}\n"),
            "coefficients.rho2");
  EXPECT_EQ(error_field(std::string(kMinimal) + "time: {T: 1, dt: 0.3}\n"), "time.dt");
  EXPECT_EQ(error_field(std::string(kMinimal) + "epsilons: [0.25, 0.5]\n"), "epsilons");
  // 1 / 0.3 lattice cells do not tile the unit box
  EXPECT_EQ(error_field(std::string(kMinimal) + "epsilons: [0.3]\n"), "epsilons[0]");
  EXPECT_EQ(error_field("dimension: 2\ngeometry: {shape: disk, radius: 0.25}\n"), "coefficients");
  EXPECT_EQ(error_field("dimension: [2\n"), "<document>");
  EXPECT_EQ(error_field(std::string(kMinimal) + "theta: {window: [[1, 2], [0, 1]]}\n"), "theta.window[0][1]");
}

TEST(Config, ThetaPeriodMustTileEpsilonCells) {
  const std::string base = std::string(kMinimal) + "theta: {window: [[1, 0, 1, 0], [1, 0, 1, 0], [1, 0, 1, 0], [1, 0, 1, 0]]}\n";
  EXPECT_NO_THROW(parse_config(base + "epsilons: [0.5, 0.25]\n"));
  // 1 / 0.2 = 5 cells along the axis of period 2
  EXPECT_EQ(error_field(base + "epsilons: [0.5, 0.2]\n"), "epsilons[1]");
}

TEST(Config, AssumptionChecksCanBeSkipped) {
  const std::string text = "dimension: 2\ngeometry: {shape: disk, radius: 0.25}\ncoefficients: {A0: -1, B0: 1}\n";
  EXPECT_THROW(parse_config(text), ConfigError);
  EXPECT_NO_THROW(parse_config(text, false));
}

TEST(Runs, LaminateConfigGivesHarmonicMean) {
  const SimConfig c = load_config(config_path("laminate_1d.yaml"));
  const auto out = temp_dir("laminate");
  const EffectiveModel m = run_effective(c, out);
  EXPECT_NEAR(m.C0(0, 0), 1.6, 0.016);
  EXPECT_TRUE(std::filesystem::exists(out / "effective.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "effective_report.txt"));
}

TEST(Runs, ConstantDensityConfigGivesClosedForm) {
  const SimConfig c = load_config(config_path("disk_density.yaml"));
  const EffectiveModel m = run_effective(c, temp_dir("density"));
  EXPECT_NEAR(m.solid_fraction + m.fluid_fraction, 1.0, 1e-12);
  EXPECT_NEAR(std::min(m.solid_fraction, m.fluid_fraction), kPi / 16, 5e-3);
  EXPECT_NEAR(m.rho0, 2.0 * m.solid_fraction + 1.0 * m.fluid_fraction, 1e-12);
}

TEST(Convergence, EmptyEpsilonListIsConfigError) {
  SimConfig c = parse_config(kMinimal);
  EXPECT_THROW(run_convergence(c, temp_dir("empty")), ConfigError);
  EXPECT_THROW(run_fine(c, temp_dir("empty")), ConfigError);
  EXPECT_THROW(validate_epsilons({0.25, 0.25}), ConfigError);
  EXPECT_THROW(validate_epsilons({-0.25}), ConfigError);
}

TEST(Convergence, InterpolationReproducesBilinearFields) {
  const BoxMesh coarse({4, 4}, {1.0, 1.0}, false), fine({12, 12}, {1.0, 1.0}, false);
  const DofMap cd(coarse.num_nodes(), 2, boundary_nodes(coarse));
  const DofMap fd(fine.num_nodes(), 2, boundary_nodes(fine));
  const SparseMatrix p = interpolation_matrix(coarse, cd, fine, fd);
  auto field = [](const Point& x, Index comp) { return comp == 0 ? x[0] * x[1] : 2.0 - x[1]; };
  Vector uc(cd.size());
  for (Index r = 0; r < cd.size(); ++r) uc(r) = field(coarse.node_coordinates(cd.full(r) / 2), cd.full(r) % 2);
  const Vector uf = p * uc;
  // boundary values are dropped, so only coarse cells with four free corners reproduce the field
  int checked = 0;
  for (Index r = 0; r < fd.size(); ++r) {
    const Point x = fine.node_coordinates(fd.full(r) / 2);
    if (x[0] < 0.25 - 1e-12 || x[0] > 0.75 + 1e-12 || x[1] < 0.25 - 1e-12 || x[1] > 0.75 + 1e-12) continue;
    EXPECT_NEAR(uf(r), field(x, fd.full(r) % 2), 1e-14);
    ++checked;
  }
  EXPECT_EQ(checked, 2 * 49);
}

TEST(Convergence, RestrictionMatchesFullIndices) {
  const DofMap from(4, 1, {0, 0, 0, 0});
  const DofMap to(4, 1, {1, 0, 0, 1});
  const SparseMatrix r = restriction_by_full_index(to, from);
  Vector v(4);
  v << 1, 2, 3, 4;
  const Vector w = r * v;
  ASSERT_EQ(w.size(), 2);
  EXPECT_EQ(w(0), 2);
  EXPECT_EQ(w(1), 3);
}

TEST(Convergence, ContrastOneMatchesFloorAndRecordIsOrdered) {
  SimConfig c = load_config(config_path("converge_contrast1.yaml"));
  c.epsilons = {0.5, 0.25};
  c.mesh.cell = 8;
  c.mesh.fine = 4;
  c.mesh.macro = 8;
  c.T = 0.25;
  c.dt = 0.0625;
  const auto out = temp_dir("contrast1");
  const ConvergenceRecord r = run_convergence(c, out);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].epsilon, 0.5);
  EXPECT_EQ(r.entries[1].epsilon, 0.25);
  for (const auto& e : r.entries) {
    EXPECT_GT(e.reference, 0.0);
    EXPECT_LE(e.error, e.floor * (1 + 1e-6) + 1e-10 * e.reference);
  }
  // first entry shares the macro mesh
  EXPECT_EQ(r.entries[0].floor, 0.0);
  EXPECT_TRUE(std::filesystem::exists(out / "convergence.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "convergence.dat"));
}

TEST(Convergence, StrictlyDecreasing) {
  ConvergenceRecord r;
  r.entries.resize(3);
  r.entries[0].error = 3;
  r.entries[1].error = 2;
  r.entries[2].error = 1;
  EXPECT_TRUE(r.strictly_decreasing());
  r.entries[2].error = 2;
  EXPECT_FALSE(r.strictly_decreasing());
}

TEST(Convergence, CsvHeaderAndRows) {
  ConvergenceRecord r;
  ConvergenceEntry e;
  e.epsilon = 0.25;
  e.error = 0.5;
  e.reference = 2.0;
  r.entries.push_back(e);
  std::ostringstream s;
  write_convergence_csv(s, r);
  EXPECT_EQ(s.str(), "epsilon,error,relative_error,reference,floor,fine_h,macro_h,dt,fine_unknowns\n"
                     "0.25,0.5,0.25,2,0,0,0,0,0\n");
}

TEST(Properties, DefaultSuitePasses) {
  const SimConfig c = parse_config(kMinimal);
  const auto results = run_property_suite(c);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.id << ": " << r.detail;
  EXPECT_TRUE(all_passed(results));
}

TEST(Properties, SeedSweepGivesSamePassSet) {
  const SimConfig c = parse_config(kMinimal);
  std::vector<bool> first;
  for (std::uint64_t seed : {1, 2, 3}) {
    PropertyOptions o;
    o.seed = seed;
    std::vector<bool> pass;
    for (const auto& r : run_property_suite(c, o)) pass.push_back(r.passed);
    if (first.empty()) first = pass;
    EXPECT_EQ(pass, first);
  }
}

TEST(Properties, NonSpdFixtureFailsOnlyCoercivity) {
  SimConfig c = parse_config(kMinimal);
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = -0.5;
  c.coefficients.A0 = MatrixField::constant(a);
  std::vector<std::string> failed;
  for (const auto& r : run_property_suite(c))
    if (!r.passed) failed.push_back(r.id);
  EXPECT_EQ(failed, std::vector<std::string>{"assumptions.coercivity"});
}

TEST(Properties, LedgerIsDeterministic) {
  const SimConfig c = parse_config(kMinimal);
  std::ostringstream a, b;
  write_property_ledger(a, run_property_suite(c));
  write_property_ledger(b, run_property_suite(c));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("id,module,status,detail\n", 0), 0u);
}
