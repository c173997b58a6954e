#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <vector>

namespace aphom {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Compressed sparse row storage.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// A point of R^N (N <= 3 in practice).
using Point = std::vector<double>;

/// Fourth-order tensors acting on gradients are stored as N^2 x N^2 matrices.
/// A gradient G of a vector field u is flattened row-major: G(k, l) = d u_k / d x_l
/// sits at position k * N + l.
inline Index grad_index(int component, int direction, int dim) {
  return static_cast<Index>(component) * dim + direction;
}

/// Lift an N x N matrix A to the gradient tensor acting row by row:
/// (C G)_k = A G_k, i.e. each displacement component diffuses with A.
inline Matrix lift_row_tensor(const Matrix& a) {
  const Index n = a.rows();
  Matrix c = Matrix::Zero(n * n, n * n);
  for (Index k = 0; k < n; ++k) c.block(k * n, k * n, n, n) = a;
  return c;
}

/// Flatten an N x N matrix row-major.
inline Vector flatten(const Matrix& g) {
  const Index n = g.rows();
  Vector out(n * n);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) out(k * n + l) = g(k, l);
  return out;
}

inline Matrix unflatten(const Vector& v, int dim) {
  Matrix g(dim, dim);
  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l) g(k, l) = v(k * dim + l);
  return g;
}

}  // namespace aphom
