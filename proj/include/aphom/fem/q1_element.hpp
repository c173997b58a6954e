#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "aphom/core/types.hpp"
#include "aphom/geometry/mesh.hpp"

namespace aphom {

/// Multilinear (Q1) element on an axis-aligned box with 2-point Gauss quadrature per axis.
///
/// All cells of a BoxMesh are translates of each other, so one instance serves
/// the whole mesh. Local corner numbering follows BoxMesh::cell_vertices.
class Q1Element {
 public:
  explicit Q1Element(const BoxMesh& mesh) : Q1Element(spacings(mesh)) {}

  explicit Q1Element(const Point& h) : dim_(static_cast<int>(h.size())), h_(h) {
    nloc_ = 1 << dim_;
    nq_ = 1 << dim_;
    double vol = 1.0;
    for (double x : h_) vol *= x;
    const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    value_.assign(static_cast<std::size_t>(nq_ * nloc_), 0.0);
    grad_.assign(static_cast<std::size_t>(nq_ * nloc_ * dim_), 0.0);
    weight_.assign(static_cast<std::size_t>(nq_), vol / nq_);
    for (int q = 0; q < nq_; ++q) {
      double xi[3];
      for (int i = 0; i < dim_; ++i) xi[i] = g[(q >> i) & 1];
      for (int a = 0; a < nloc_; ++a) {
        double v = 1.0;
        for (int i = 0; i < dim_; ++i) v *= factor(a, i, xi[i]);
        value_[q * nloc_ + a] = v;
        for (int l = 0; l < dim_; ++l) {
          double d = 1.0;
          for (int i = 0; i < dim_; ++i)
            d *= (i == l) ? dfactor(a, i) / h_[i] : factor(a, i, xi[i]);
          grad_[(q * nloc_ + a) * dim_ + l] = d;
        }
      }
    }
    // scalar building blocks: S_ln(a,b) = int d_l phi_a d_n phi_b, M(a,b) = int phi_a phi_b
    mass_ = Matrix::Zero(nloc_, nloc_);
    weak_grad_.assign(static_cast<std::size_t>(dim_), Matrix::Zero(nloc_, nloc_));
    stiff_.assign(static_cast<std::size_t>(dim_ * dim_), Matrix::Zero(nloc_, nloc_));
    for (int q = 0; q < nq_; ++q)
      for (int a = 0; a < nloc_; ++a)
        for (int b = 0; b < nloc_; ++b) {
          const double w = weight_[q];
          mass_(a, b) += w * value(q, a) * value(q, b);
          for (int l = 0; l < dim_; ++l) {
            weak_grad_[l](a, b) += w * value(q, a) * grad(q, b, l);
            for (int n = 0; n < dim_; ++n) stiff_[l * dim_ + n](a, b) += w * grad(q, a, l) * grad(q, b, n);
          }
        }
    basis_integral_ = mass_.rowwise().sum();
  }

  int dimension() const { return dim_; }
  int num_local() const { return nloc_; }
  int num_quadrature() const { return nq_; }
  const Point& spacing() const { return h_; }
  double volume() const {
    double v = 1.0;
    for (double x : h_) v *= x;
    return v;
  }

  double value(int q, int a) const { return value_[q * nloc_ + a]; }
  double grad(int q, int a, int l) const { return grad_[(q * nloc_ + a) * dim_ + l]; }
  double weight(int q) const { return weight_[q]; }

  /// Reference coordinates of quadrature point q in [0,1]^N.
  Point quadrature_point(int q) const {
    const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    Point xi(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) xi[i] = g[(q >> i) & 1];
    return xi;
  }

  const Matrix& mass() const { return mass_; }
  /// int phi_a d_l phi_b
  const Matrix& weak_gradient(int l) const { return weak_grad_[l]; }
  /// int d_l phi_a d_n phi_b
  const Matrix& stiffness(int l, int n) const { return stiff_[l * dim_ + n]; }
  /// int phi_a
  const Vector& basis_integral() const { return basis_integral_; }

  /// Scalar Laplacian int grad phi_a . grad phi_b.
  Matrix laplacian() const {
    Matrix k = Matrix::Zero(nloc_, nloc_);
    for (int l = 0; l < dim_; ++l) k += stiffness(l, l);
    return k;
  }

  /// Vector stiffness (a,k),(b,m) -> int C[(k,l),(m,n)] d_l phi_a d_n phi_b, local dof a*N + k.
  Matrix vector_stiffness(const Matrix& c) const {
    const int nd = nloc_ * dim_;
    Matrix k = Matrix::Zero(nd, nd);
    for (int kk = 0; kk < dim_; ++kk)
      for (int l = 0; l < dim_; ++l)
        for (int m = 0; m < dim_; ++m)
          for (int n = 0; n < dim_; ++n) {
            const double cv = c(kk * dim_ + l, m * dim_ + n);
            if (cv == 0.0) continue;
            const Matrix& s = stiffness(l, n);
            for (int a = 0; a < nloc_; ++a)
              for (int b = 0; b < nloc_; ++b) k(a * dim_ + kk, b * dim_ + m) += cv * s(a, b);
          }
    return k;
  }

  /// Load of a constant stress sigma (flattened N x N): (a,k) -> -int sigma_(k,l) d_l phi_a.
  Vector stress_load(const Vector& sigma) const {
    Vector f = Vector::Zero(nloc_ * dim_);
    for (int a = 0; a < nloc_; ++a) {
      for (int kk = 0; kk < dim_; ++kk) {
        double s = 0.0;
        for (int l = 0; l < dim_; ++l) {
          double gi = 0.0;
          for (int q = 0; q < nq_; ++q) gi += weight(q) * grad(q, a, l);
          s += sigma(kk * dim_ + l) * gi;
        }
        f(a * dim_ + kk) = -s;
      }
    }
    return f;
  }

  static Point spacings(const BoxMesh& mesh) {
    Point h(static_cast<std::size_t>(mesh.dimension()));
    for (int i = 0; i < mesh.dimension(); ++i) h[i] = mesh.spacing(i);
    return h;
  }

 private:
  static double factor(int a, int i, double xi) { return ((a >> i) & 1) ? xi : 1.0 - xi; }
  static double dfactor(int a, int i) { return ((a >> i) & 1) ? 1.0 : -1.0; }

  int dim_;
  int nloc_ = 0, nq_ = 0;
  Point h_;
  std::vector<double> value_, grad_, weight_;
  Matrix mass_;
  std::vector<Matrix> weak_grad_, stiff_;
  Vector basis_integral_;
};

}  // namespace aphom
