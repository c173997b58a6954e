#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"
#include "aphom/geometry/cell_geometry.hpp"

namespace aphom {

enum class Phase : std::uint8_t { Solid = 0, Fluid = 1 };

enum class PhaseTag : std::uint8_t { Solid = 0, Fluid = 1, InterfaceCut = 2 };

struct PeriodicPair {
  Index low;   // vertex on the face x_axis = 0
  Index high;  // partner on the face x_axis = L_axis
  int axis;
};

/// Uniform axis-aligned box mesh of [0,L_1] x ... x [0,L_N] with n_i cells per axis.
///
/// Geometric vertices form the full (n_i + 1) grid. With `periodic` set, the
/// vertices on opposite faces are identified and share one node (unknown);
/// otherwise every vertex is its own node. Axis 0 varies fastest.
class BoxMesh {
 public:
  BoxMesh() = default;
  BoxMesh(std::vector<long> cells, Point lengths, bool periodic)
      : cells_(std::move(cells)), lengths_(std::move(lengths)), periodic_(periodic) {
    const std::size_t n = cells_.size();
    if (n < 1 || n > 3) throw ShapeError("BoxMesh: dimension must be 1, 2 or 3");
    if (lengths_.size() != n) throw ShapeError("BoxMesh: lengths have wrong dimension");
    num_cells_ = num_vertices_ = num_nodes_ = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (cells_[i] < 1) throw ShapeError("BoxMesh: at least one cell per axis");
      num_cells_ *= cells_[i];
      num_vertices_ *= cells_[i] + 1;
      num_nodes_ *= periodic_ ? cells_[i] : cells_[i] + 1;
    }
    phase_.assign(static_cast<std::size_t>(num_cells_), Phase::Solid);
    cut_.assign(static_cast<std::size_t>(num_cells_), 0);
  }

  int dimension() const { return static_cast<int>(cells_.size()); }
  const std::vector<long>& cells_per_axis() const { return cells_; }
  const Point& lengths() const { return lengths_; }
  bool periodic() const { return periodic_; }
  Index num_cells() const { return num_cells_; }
  Index num_vertices() const { return num_vertices_; }
  Index num_nodes() const { return num_nodes_; }
  int corners_per_cell() const { return 1 << dimension(); }

  double spacing(int axis) const { return lengths_[axis] / static_cast<double>(cells_[axis]); }
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dimension(); ++i) v *= spacing(i);
    return v;
  }
  double total_volume() const {
    double v = 1.0;
    for (double l : lengths_) v *= l;
    return v;
  }

  std::vector<long> cell_multi_index(Index c) const {
    std::vector<long> idx(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      idx[i] = c % cells_[i];
      c /= cells_[i];
    }
    return idx;
  }

  Point cell_centroid(Index c) const {
    const auto idx = cell_multi_index(c);
    Point x(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i)
      x[i] = (static_cast<double>(idx[i]) + 0.5) * spacing(static_cast<int>(i));
    return x;
  }

  Index vertex_index(const std::vector<long>& v) const {
    Index n = 0, stride = 1;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      n += v[i] * stride;
      stride *= cells_[i] + 1;
    }
    return n;
  }

  std::vector<long> vertex_multi_index(Index v) const {
    std::vector<long> idx(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      idx[i] = v % (cells_[i] + 1);
      v /= cells_[i] + 1;
    }
    return idx;
  }

  Point vertex_coordinates(Index v) const {
    const auto idx = vertex_multi_index(v);
    Point x(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i)
      x[i] = static_cast<double>(idx[i]) * spacing(static_cast<int>(i));
    return x;
  }

  /// Unknown carried by a geometric vertex.
  Index node_of_vertex(Index v) const {
    if (!periodic_) return v;
    auto idx = vertex_multi_index(v);
    Index n = 0, stride = 1;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      n += (idx[i] % cells_[i]) * stride;
      stride *= cells_[i];
    }
    return n;
  }

  /// A vertex representing each node (the one with the smallest coordinates).
  Index vertex_of_node(Index node) const {
    if (!periodic_) return node;
    std::vector<long> idx(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      idx[i] = node % cells_[i];
      node /= cells_[i];
    }
    return vertex_index(idx);
  }

  Point node_coordinates(Index node) const { return vertex_coordinates(vertex_of_node(node)); }

  /// Corner vertices of a cell; bit i of the local number selects the upper side of axis i.
  std::array<Index, 8> cell_vertices(Index c) const {
    const auto idx = cell_multi_index(c);
    std::array<Index, 8> out{};
    std::vector<long> v(cells_.size());
    for (int local = 0; local < corners_per_cell(); ++local) {
      for (std::size_t i = 0; i < cells_.size(); ++i) v[i] = idx[i] + ((local >> i) & 1);
      out[static_cast<std::size_t>(local)] = vertex_index(v);
    }
    return out;
  }

  std::array<Index, 8> cell_nodes(Index c) const {
    auto out = cell_vertices(c);
    for (int local = 0; local < corners_per_cell(); ++local)
      out[static_cast<std::size_t>(local)] = node_of_vertex(out[static_cast<std::size_t>(local)]);
    return out;
  }

  /// Identifications of vertices on opposite faces (empty when not periodic).
  std::vector<PeriodicPair> periodic_pairs() const {
    std::vector<PeriodicPair> pairs;
    if (!periodic_) return pairs;
    for (Index v = 0; v < num_vertices_; ++v) {
      auto idx = vertex_multi_index(v);
      for (int axis = 0; axis < dimension(); ++axis) {
        if (idx[axis] != 0) continue;
        auto hi = idx;
        hi[axis] = cells_[axis];
        pairs.push_back({v, vertex_index(hi), axis});
      }
    }
    return pairs;
  }

  /// Vertices on the outer boundary of the box.
  bool is_boundary_vertex(Index v) const {
    const auto idx = vertex_multi_index(v);
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (idx[i] == 0 || idx[i] == cells_[i]) return true;
    return false;
  }

  Phase phase(Index c) const { return phase_[static_cast<std::size_t>(c)]; }
  bool is_cut(Index c) const { return cut_[static_cast<std::size_t>(c)] != 0; }
  PhaseTag tag(Index c) const {
    if (is_cut(c)) return PhaseTag::InterfaceCut;
    return phase(c) == Phase::Solid ? PhaseTag::Solid : PhaseTag::Fluid;
  }
  void set_phase(Index c, Phase p, bool cut = false) {
    phase_[static_cast<std::size_t>(c)] = p;
    cut_[static_cast<std::size_t>(c)] = cut ? 1 : 0;
  }

  Index count_phase(Phase p) const {
    Index n = 0;
    for (auto q : phase_) n += (q == p);
    return n;
  }

  /// Tag every cell with a membership test evaluated at its centroid and corners.
  void tag_cells(const std::function<bool(const Point&)>& solid) {
    for (Index c = 0; c < num_cells_; ++c) {
      const bool s = solid(cell_centroid(c));
      bool cut = false;
      for (Index v : corner_span(c))
        if (solid(vertex_coordinates(v)) != s) cut = true;
      set_phase(c, s ? Phase::Solid : Phase::Fluid, cut);
    }
  }

  /// Plain-text export: vertex coordinates, then cells as corner lists with tags.
  void write_text(std::ostream& out) const {
    out << "# dimension " << dimension() << "\n# vertices " << num_vertices_ << "\n";
    for (Index v = 0; v < num_vertices_; ++v) {
      const auto x = vertex_coordinates(v);
      for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << x[i];
      out << "\n";
    }
    out << "# cells " << num_cells_ << " (corners..., tag 0=solid 1=fluid 2=cut)\n";
    for (Index c = 0; c < num_cells_; ++c) {
      const auto vs = cell_vertices(c);
      for (int k = 0; k < corners_per_cell(); ++k) out << vs[static_cast<std::size_t>(k)] << " ";
      out << static_cast<int>(tag(c)) << "\n";
    }
  }

 private:
  std::vector<Index> corner_span(Index c) const {
    const auto vs = cell_vertices(c);
    return std::vector<Index>(vs.begin(), vs.begin() + corners_per_cell());
  }

  std::vector<long> cells_;
  Point lengths_;
  bool periodic_ = false;
  Index num_cells_ = 0, num_vertices_ = 0, num_nodes_ = 0;
  std::vector<Phase> phase_;
  std::vector<std::uint8_t> cut_;
};

/// Uniform periodic mesh of the unit cell with centroid phase tags.
inline BoxMesh mesh_cell(const CellGeometry& g, int resolution) {
  if (resolution < 4) throw ShapeError("mesh_cell: resolution must be at least 4");
  const int n = g.dimension();
  BoxMesh mesh(std::vector<long>(static_cast<std::size_t>(n), resolution),
               Point(static_cast<std::size_t>(n), 1.0), true);
  mesh.tag_cells([&g](const Point& y) {
    // corners on the upper faces belong to the next period
    Point w(y);
    for (double& t : w)
      if (t >= 1.0) t -= 1.0;
    return g.is_solid(w);
  });
  return mesh;
}

}  // namespace aphom
