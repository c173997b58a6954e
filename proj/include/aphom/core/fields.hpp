#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aphom/ap/trig_polynomial.hpp"
#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

struct MatrixTerm {
  TrigPolynomial profile;  // scalar spatial profile, real part is used
  Matrix value;            // N x N
};

/// Matrix-valued coefficient  y -> sum_j Re(p_j(y)) M_j  on R^N.
class MatrixField {
 public:
  MatrixField() = default;
  explicit MatrixField(int dim) : dim_(dim) {}

  static MatrixField constant(const Matrix& m) {
    MatrixField f(static_cast<int>(m.rows()));
    f.add(TrigPolynomial::constant(static_cast<int>(m.rows()), 1.0), m);
    return f;
  }

  static MatrixField scalar(int dim, double a) {
    return constant(a * Matrix::Identity(dim, dim));
  }

  void add(TrigPolynomial profile, Matrix value) {
    if (profile.dimension() != dim_ || value.rows() != dim_ || value.cols() != dim_)
      throw ShapeError("MatrixField: term has wrong dimension");
    terms_.push_back({std::move(profile), std::move(value)});
  }

  int dimension() const { return dim_; }
  const std::vector<MatrixTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Matrix operator()(std::span<const double> y) const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) m += t.profile.real_value(y) * t.value;
    return m;
  }

  /// Largest angular frequency of the spatial profiles.
  double max_frequency() const {
    double f = 0.0;
    for (const auto& t : terms_) f = std::max(f, t.profile.max_frequency());
    return f;
  }

 private:
  int dim_ = 1;
  std::vector<MatrixTerm> terms_;
};

/// Scalar field y -> Re(p(y)).
struct ScalarProfile {
  TrigPolynomial profile;
  double operator()(std::span<const double> y) const { return profile.real_value(y); }
  static ScalarProfile constant(int dim, double v) { return {TrigPolynomial::constant(dim, v)}; }
};

}  // namespace aphom
