#pragma once

#include <iomanip>
#include <ostream>
#include <vector>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

/// Assembled operator with its symmetry flag.
struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }

  /// max |A - A^T|
  double asymmetry() const {
    SparseMatrix t = matrix.transpose();
    SparseMatrix d = matrix - t;
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
  }
};

/// Unknowns of a field with `components` values per mesh node; some nodes are
/// Dirichlet-zero and are eliminated from the linear systems.
class DofMap {
 public:
  DofMap() = default;
  DofMap(Index nodes, int components, const std::vector<char>& constrained_node)
      : nodes_(nodes), components_(components) {
    if (static_cast<Index>(constrained_node.size()) != nodes)
      throw ShapeError("DofMap: constraint mask has wrong length");
    full_to_reduced_.assign(static_cast<std::size_t>(nodes * components), -1);
    for (Index n = 0; n < nodes; ++n) {
      if (constrained_node[static_cast<std::size_t>(n)]) continue;
      for (int c = 0; c < components; ++c) {
        full_to_reduced_[static_cast<std::size_t>(n * components + c)] =
            static_cast<Index>(reduced_to_full_.size());
        reduced_to_full_.push_back(n * components + c);
      }
    }
  }

  static DofMap unconstrained(Index nodes, int components) {
    return DofMap(nodes, components, std::vector<char>(static_cast<std::size_t>(nodes), 0));
  }

  Index num_nodes() const { return nodes_; }
  int components() const { return components_; }
  Index full_size() const { return nodes_ * components_; }
  Index size() const { return static_cast<Index>(reduced_to_full_.size()); }
  bool node_constrained(Index n) const {
    return full_to_reduced_[static_cast<std::size_t>(n * components_)] < 0;
  }
  Index reduced(Index full) const { return full_to_reduced_[static_cast<std::size_t>(full)]; }
  Index full(Index reduced) const { return reduced_to_full_[static_cast<std::size_t>(reduced)]; }

  /// Full vector with zeros on constrained entries.
  Vector expand(const Vector& r) const {
    Vector f = Vector::Zero(full_size());
    for (Index i = 0; i < size(); ++i) f(full(i)) = r(i);
    return f;
  }

  Vector restrict(const Vector& f) const {
    Vector r(size());
    for (Index i = 0; i < size(); ++i) r(i) = f(full(i));
    return r;
  }

  /// Reduce a full-space matrix (rows and columns) to the free unknowns.
  SparseMatrix reduce(const SparseMatrix& a) const { return reduce(a, *this); }

  /// Rows from this map, columns from `cols`.
  SparseMatrix reduce(const SparseMatrix& a, const DofMap& cols) const {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k) {
      const Index r = reduced(k);
      if (r < 0) continue;
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        const Index c = cols.reduced(it.col());
        if (c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
      }
    }
    SparseMatrix out(size(), cols.size());
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }

 private:
  Index nodes_ = 0;
  int components_ = 1;
  std::vector<Index> full_to_reduced_;
  std::vector<Index> reduced_to_full_;
};

/// Constraints of a cell or domain problem.
struct ConstraintSet {
  std::vector<char> dirichlet_node;  // Dirichlet-zero nodes
  bool zero_mean = false;            // per-component zero mean when no Dirichlet nodes exist

  bool any_dirichlet() const {
    for (char c : dirichlet_node)
      if (c) return true;
    return false;
  }
};

inline void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  out << std::setprecision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

inline void write_matrix_market(std::ostream& out, const Vector& v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n" << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v(i) << "\n";
}

}  // namespace aphom
