#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aphom/ap/pore_distribution.hpp"
#include "aphom/ap/torus.hpp"
#include "aphom/ap/trig_polynomial.hpp"

using namespace aphom;

namespace {
constexpr double kPi = std::numbers::pi;

// brute-force midpoint average over [0,R]^N, independent of window_mean
double box_average(const TrigPolynomial& p, double side, long per_axis) {
  const int dim = p.dimension();
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  double sum = 0.0;
  Point y(dim);
  for (long n = 0; n < total; ++n) {
    long r = n;
    for (int i = 0; i < dim; ++i) {
      y[i] = (static_cast<double>(r % per_axis) + 0.5) * side / per_axis;
      r /= per_axis;
    }
    sum += p.real_value(y);
  }
  return sum / static_cast<double>(total);
}
}  // namespace

TEST(MeanValue, Constant) {
  EXPECT_EQ(mean_value(TrigPolynomial::constant(1, 3.0)), Complex(3.0));
}

TEST(MeanValue, IrrationalCosineHasZeroMean) {
  const auto p = TrigPolynomial::cosine({std::sqrt(2.0)}, 2.0);
  EXPECT_EQ(mean_value(p), Complex(0.0));
}

TEST(MeanValue, ProductOfCosinesAgainstBoxAverage) {
  auto p = TrigPolynomial::constant(2, 3.0) +
           TrigPolynomial::cosine({2 * kPi, 0.0}, 2.0) * TrigPolynomial::cosine({0.0, 2 * kPi});
  EXPECT_NEAR(mean_value(p).real(), 3.0, 1e-15);
  EXPECT_NEAR(box_average(p, 8.0, 256), 3.0, 1e-10);
}

TEST(MeanValue, TranslationInvariant) {
  auto p = TrigPolynomial::constant(2, 1.5) + TrigPolynomial::sine({1.0, std::sqrt(3.0)}, 0.7);
  const double a[2] = {0.37, -2.1};
  EXPECT_NEAR(std::abs(mean_value(p.shifted(a)) - mean_value(p)), 0.0, 1e-15);
}

TEST(MeanValue, RealForConjugateSymmetric) {
  auto p = TrigPolynomial::constant(1, 2.0) + TrigPolynomial::cosine({1.3}, 0.4);
  ASSERT_TRUE(p.is_conjugate_symmetric());
  EXPECT_EQ(mean_value(p).imag(), 0.0);
}

TEST(Seminorm, ConstantOrder2) {
  EXPECT_DOUBLE_EQ(besicovitch_seminorm(TrigPolynomial::constant(1, 3.0), 2.0), 3.0);
}

TEST(Seminorm, CosineParseval) {
  EXPECT_NEAR(besicovitch_seminorm(TrigPolynomial::cosine({2 * kPi}), 2.0), 1.0 / std::sqrt(2.0),
              1e-15);
}

TEST(Seminorm, ZeroPolynomial) {
  EXPECT_EQ(besicovitch_seminorm(TrigPolynomial(2), 1.0), 0.0);
  EXPECT_EQ(besicovitch_seminorm(TrigPolynomial(2), 3.5), 0.0);
}

TEST(Seminorm, InvalidOrder) {
  EXPECT_THROW(besicovitch_seminorm(TrigPolynomial::constant(1, 1.0), 0.5), InvalidOrder);
}

TEST(Seminorm, Order1OfCosine) {
  // M(|cos|) = 2/pi
  EXPECT_NEAR(besicovitch_seminorm(TrigPolynomial::cosine({2 * kPi}), 1.0), 2.0 / kPi, 1e-5);
}

TEST(Seminorm, WindowOrder2MatchesParseval) {
  auto p = TrigPolynomial::constant(1, 1.0) + TrigPolynomial::cosine({2 * kPi}, 0.5);
  WindowOptions o;
  auto est = window_mean<double>(
      [&](std::span<const double> y) { return std::norm(p(y)); }, 1, p.max_frequency(), o);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(std::sqrt(est.value), besicovitch_seminorm(p, 2.0), 1e-6);
}

TEST(DetectPeriod, AllOnes) {
  auto theta = PoreDistribution::all_ones(2, 6);
  EXPECT_EQ(detect_period(theta), (std::vector<long>{1, 1}));
}

TEST(DetectPeriod, Stripes) {
  auto theta = PoreDistribution::from_function(
      {12, 12}, [](const LatticePoint& k) { return k[0] % 3 == 0 ? 1 : 0; });
  EXPECT_EQ(detect_period(theta), (std::vector<long>{3, 1}));
}

TEST(DetectPeriod, IrregularWindowHasNoPeriod) {
  std::vector<std::uint8_t> bits = {1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 0, 1};
  PoreDistribution theta({16}, bits);
  EXPECT_THROW(detect_period(theta), NoPeriodInWindow);
}

TEST(DetectPeriod, ShiftAndSubwindowCompatible) {
  auto f = [](const LatticePoint& k) { return ((k[0] % 4) < 2 && (k[1] % 3) != 1) ? 1 : 0; };
  auto theta = PoreDistribution::from_function({24, 24}, f);
  const auto p = detect_period(theta);
  EXPECT_EQ(p, (std::vector<long>{4, 3}));
  auto shifted = PoreDistribution::from_function(
      {24, 24}, [&](const LatticePoint& k) { return f({k[0] + 5, k[1] + 7}); });
  EXPECT_EQ(detect_period(shifted), p);
  const auto q = detect_period(theta.subwindow({3, 2}, {12, 12}));
  EXPECT_EQ(p[0] % q[0], 0);
  EXPECT_EQ(p[1] % q[1], 0);
}

TEST(PoreDistribution, RejectsNonBinaryAndBadDeclaredPeriod) {
  EXPECT_THROW(PoreDistribution({2}, {0, 2}), ShapeError);
  EXPECT_THROW(PoreDistribution({4}, {1, 0, 0, 0}, std::vector<long>{2}), ShapeError);
  EXPECT_NO_THROW(PoreDistribution({4}, {1, 0, 1, 0}, std::vector<long>{2}));
}

TEST(TorusConvolve, UnitGivesMean) {
  auto v = GridFunction::sample({32}, [](const Point& y) { return 2.0 + std::sin(2 * kPi * y[0]); });
  auto one = GridFunction::constant({32}, 1.0);
  auto w = torus_convolve(one, v);
  for (double x : w.values()) EXPECT_NEAR(x, 2.0, 1e-13);
}

TEST(TorusConvolve, CosineWithItself) {
  auto c = GridFunction::sample({64}, [](const Point& y) { return std::cos(2 * kPi * y[0]); });
  auto w = torus_convolve(c, c);
  for (long j = 0; j < 64; ++j)
    EXPECT_NEAR(w.values()[j], 0.5 * std::cos(2 * kPi * j / 64.0), 1e-13);
}

TEST(TorusConvolve, BruteForce2D) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<double> a(6 * 5), b(6 * 5);
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng);
  GridFunction u({6, 5}, a), v({6, 5}, b);
  auto w = torus_convolve(u, v);
  for (long i = 0; i < 6; ++i)
    for (long j = 0; j < 5; ++j) {
      double s = 0;
      for (long r = 0; r < 6; ++r)
        for (long q = 0; q < 5; ++q) s += a[r * 5 + q] * b[((i - r + 6) % 6) * 5 + (j - q + 5) % 5];
      EXPECT_NEAR(w.values()[i * 5 + j], s / 30.0, 1e-13);
    }
}

TEST(TorusConvolve, CommutativeAssociativeAndYoung) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(16 * 8), b(16 * 8), c(16 * 8);
    for (auto* vec : {&a, &b, &c})
      for (auto& x : *vec) x = d(rng);
    GridFunction u({16, 8}, a), v({16, 8}, b), w({16, 8}, c);
    auto uv = torus_convolve(u, v), vu = torus_convolve(v, u);
    auto l = torus_convolve(uv, w), r = torus_convolve(u, torus_convolve(v, w));
    for (long i = 0; i < uv.size(); ++i) {
      EXPECT_NEAR(uv.values()[i], vu.values()[i], 1e-12 * uv.sup_norm());
      EXPECT_NEAR(l.values()[i], r.values()[i], 1e-12 * std::max(1.0, l.sup_norm()));
    }
    EXPECT_LE(uv.norm(2), u.norm(1) * v.norm(2) * (1 + 1e-12));
  }
}

TEST(TorusConvolve, GridMismatch) {
  EXPECT_THROW(torus_convolve(GridFunction::constant({4}, 1), GridFunction::constant({5}, 1)),
               ShapeError);
}
