#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

struct TrigTerm {
  Point frequency;
  Complex amplitude;
};

/// Finite sum  sum_k a_k exp(i mu_k . y)  on R^dim.
///
/// This is the computational stand-in for the algebra of almost periodic
/// functions: frequencies are arbitrary real vectors, so incommensurate
/// (quasi-periodic) polynomials are representable. Terms with equal
/// frequencies are merged on insertion.
class TrigPolynomial {
 public:
  explicit TrigPolynomial(int dim = 1) : dim_(dim) {
    if (dim < 1) throw ShapeError("TrigPolynomial: dimension must be positive");
  }

  static TrigPolynomial constant(int dim, Complex value) {
    TrigPolynomial p(dim);
    p.add_term(Point(static_cast<std::size_t>(dim), 0.0), value);
    return p;
  }

  /// amplitude * cos(mu . y)
  static TrigPolynomial cosine(const Point& mu, double amplitude = 1.0) {
    TrigPolynomial p(static_cast<int>(mu.size()));
    p.add_term(mu, 0.5 * amplitude);
    p.add_term(negated(mu), 0.5 * amplitude);
    return p;
  }

  /// amplitude * sin(mu . y)
  static TrigPolynomial sine(const Point& mu, double amplitude = 1.0) {
    TrigPolynomial p(static_cast<int>(mu.size()));
    p.add_term(mu, Complex(0.0, -0.5 * amplitude));
    p.add_term(negated(mu), Complex(0.0, 0.5 * amplitude));
    return p;
  }

  int dimension() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Point& frequency, Complex amplitude) {
    if (static_cast<int>(frequency.size()) != dim_)
      throw ShapeError("TrigPolynomial: frequency has dimension " +
                       std::to_string(frequency.size()) + ", expected " +
                       std::to_string(dim_));
    for (auto& t : terms_) {
      if (same_frequency(t.frequency, frequency)) {
        t.amplitude += amplitude;
        return;
      }
    }
    terms_.push_back({frequency, amplitude});
  }

  Complex operator()(std::span<const double> y) const {
    Complex sum = 0.0;
    for (const auto& t : terms_) {
      double phase = 0.0;
      for (int i = 0; i < dim_; ++i) phase += t.frequency[i] * y[i];
      sum += t.amplitude * std::polar(1.0, phase);
    }
    return sum;
  }

  double real_value(std::span<const double> y) const { return (*this)(y).real(); }

  /// For every (mu, a) the term set also holds (-mu, conj(a)).
  bool is_conjugate_symmetric(double tol = 1e-12) const {
    for (const auto& t : terms_) {
      const Point minus = negated(t.frequency);
      Complex partner = 0.0;
      for (const auto& s : terms_)
        if (same_frequency(s.frequency, minus)) partner = s.amplitude;
      if (std::abs(partner - std::conj(t.amplitude)) > tol) return false;
    }
    return true;
  }

  /// y -> p(y + a)
  TrigPolynomial shifted(std::span<const double> a) const {
    TrigPolynomial out(dim_);
    for (const auto& t : terms_) {
      double phase = 0.0;
      for (int i = 0; i < dim_; ++i) phase += t.frequency[i] * a[i];
      out.terms_.push_back({t.frequency, t.amplitude * std::polar(1.0, phase)});
    }
    return out;
  }

  /// y -> conj(p(y))
  TrigPolynomial conjugate() const {
    TrigPolynomial out(dim_);
    for (const auto& t : terms_) out.add_term(negated(t.frequency), std::conj(t.amplitude));
    return out;
  }

  /// Largest |mu_i| over all terms and axes.
  double max_frequency() const {
    double m = 0.0;
    for (const auto& t : terms_)
      for (double f : t.frequency) m = std::max(m, std::abs(f));
    return m;
  }

  /// Sum of |a_k|, an upper bound for sup |p|.
  double amplitude_sum() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.amplitude);
    return s;
  }

  TrigPolynomial& operator+=(const TrigPolynomial& other) {
    check_same_dim(other);
    for (const auto& t : other.terms_) add_term(t.frequency, t.amplitude);
    return *this;
  }

  TrigPolynomial& operator*=(Complex c) {
    for (auto& t : terms_) t.amplitude *= c;
    return *this;
  }

  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator*(TrigPolynomial a, Complex c) { return a *= c; }
  friend TrigPolynomial operator*(Complex c, TrigPolynomial a) { return a *= c; }

  friend TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) {
    a.check_same_dim(b);
    TrigPolynomial out(a.dim_);
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_) {
        Point f(s.frequency);
        for (int i = 0; i < a.dim_; ++i) f[i] += t.frequency[i];
        out.add_term(f, s.amplitude * t.amplitude);
      }
    return out;
  }

  static bool same_frequency(const Point& a, const Point& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
  }

 private:
  static Point negated(Point mu) {
    for (double& f : mu) f = -f;
    return mu;
  }

  void check_same_dim(const TrigPolynomial& other) const {
    if (other.dim_ != dim_) throw ShapeError("TrigPolynomial: dimension mismatch");
  }

  int dim_;
  std::vector<TrigTerm> terms_;
};

/// Mean value M(p): the amplitude of the zero frequency, exact.
inline Complex mean_value(const TrigPolynomial& p) {
  const Point zero(static_cast<std::size_t>(p.dimension()), 0.0);
  for (const auto& t : p.terms())
    if (TrigPolynomial::same_frequency(t.frequency, zero)) return t.amplitude;
  return 0.0;
}

/// Cube averaging [0,R]^N with R doubled until two successive estimates agree.
struct WindowOptions {
  double start_side = 1.0;
  double relative_tolerance = 1e-6;
  /// Estimates are compared against max(|estimate|, scale).
  double scale = 1.0;
  int min_samples_per_unit = 8;
  /// Upper bound on the number of samples of a single estimate.
  double max_samples = 1 << 24;
  /// Also double the sampling density at every step; needed for integrands
  /// that are not band-limited, such as |p|^q.
  bool refine_density = false;
};

template <typename Value>
struct WindowEstimate {
  Value value{};
  double side = 0.0;
  bool converged = false;
};

namespace detail {

template <typename Value, typename F>
Value cube_average(F&& f, int dim, double side, long per_axis) {
  const double h = side / static_cast<double>(per_axis);
  std::vector<long> idx(static_cast<std::size_t>(dim), 0);
  Point y(static_cast<std::size_t>(dim));
  Value sum{};
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  for (long n = 0; n < total; ++n) {
    long rest = n;
    for (int i = dim - 1; i >= 0; --i) {
      idx[i] = rest % per_axis;
      rest /= per_axis;
      y[i] = (static_cast<double>(idx[i]) + 0.5) * h;
    }
    sum += f(std::span<const double>(y));
  }
  return sum / static_cast<double>(total);
}

}  // namespace detail

/// Approximates lim_R (1/R^N) int_{[0,R]^N} f by midpoint sampling, doubling R.
/// `max_frequency` (angular) sets the sampling density so that oscillations
/// are resolved.
template <typename Value, typename F>
WindowEstimate<Value> window_mean(F&& f, int dim, double max_frequency,
                                  const WindowOptions& opt = {}) {
  const double cycles_per_unit = max_frequency / (2.0 * std::numbers::pi);
  int per_unit = std::max(opt.min_samples_per_unit,
                                static_cast<int>(std::ceil(4.0 * cycles_per_unit)) + 2);
  WindowEstimate<Value> est;
  bool have_previous = false;
  Value previous{};
  for (double side = opt.start_side;; side *= 2.0, per_unit *= opt.refine_density ? 2 : 1) {
    const long per_axis = std::max(1L, static_cast<long>(std::ceil(side * per_unit)));
    if (std::pow(static_cast<double>(per_axis), dim) > opt.max_samples) break;
    const Value current = detail::cube_average<Value>(f, dim, side, per_axis);
    est.value = current;
    est.side = side;
    if (have_previous) {
      const double ref = std::max(std::abs(current), opt.scale);
      if (std::abs(current - previous) <= opt.relative_tolerance * ref) {
        est.converged = true;
        return est;
      }
    }
    previous = current;
    have_previous = true;
  }
  return est;
}

/// Besicovitch seminorm [M(|p|^order)]^(1/order).
/// Order 2 is exact through Parseval; other orders use window averaging.
inline double besicovitch_seminorm(const TrigPolynomial& p, double order,
                                   const WindowOptions& opt = {}) {
  if (!(order >= 1.0) || !std::isfinite(order))
    throw InvalidOrder("besicovitch_seminorm: order must lie in [1, inf), got " +
                       std::to_string(order));
  if (p.empty()) return 0.0;
  if (order == 2.0) {
    double s = 0.0;
    for (const auto& t : p.terms()) s += std::norm(t.amplitude);
    return std::sqrt(s);
  }
  WindowOptions o = opt;
  // compare relative to the size of |p|^order, not to 1
  o.scale = std::pow(p.amplitude_sum(), order) * 1e-6;
  o.refine_density = true;
  auto integrand = [&p, order](std::span<const double> y) {
    return std::pow(std::abs(p(y)), order);
  };
  const auto est = window_mean<double>(integrand, p.dimension(), p.max_frequency(), o);
  return std::pow(est.value, 1.0 / order);
}

}  // namespace aphom
