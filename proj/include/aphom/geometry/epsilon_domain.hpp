#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "aphom/ap/pore_distribution.hpp"
#include "aphom/core/errors.hpp"
#include "aphom/geometry/cell_geometry.hpp"
#include "aphom/geometry/mesh.hpp"

namespace aphom {

/// The perforated domain Omega = Omega_1^eps u Omega_2^eps meshed at the fine scale.
struct EpsilonDomain {
  Point lengths;                 // Omega = [0, L_1] x ... x [0, L_N]
  double epsilon = 0.0;
  std::vector<long> lattice;     // lattice cells per axis, L_i / epsilon
  std::vector<long> theta_period;
  std::vector<std::uint8_t> inclusion;  // theta(k) per lattice cell, axis 0 fastest
  int resolution_per_cell = 0;
  BoxMesh mesh;                  // non-periodic, no-slip outer boundary

  int dimension() const { return static_cast<int>(lengths.size()); }

  /// Fast variable x / eps at the centroid of a mesh cell.
  Point fast_coordinate(Index cell) const {
    Point y = mesh.cell_centroid(cell);
    for (double& t : y) t /= epsilon;
    return y;
  }

  /// Fast variable reduced to the reference cell [0,1)^N.
  Point cell_coordinate(Index cell) const {
    Point y = fast_coordinate(cell);
    for (double& t : y) t -= std::floor(t);
    return y;
  }

  long lattice_cell_of(Index cell) const {
    const Point y = fast_coordinate(cell);
    long n = 0, stride = 1;
    for (std::size_t i = 0; i < y.size(); ++i) {
      n += static_cast<long>(std::floor(y[i])) * stride;
      stride *= lattice[i];
    }
    return n;
  }

  long num_lattice_cells() const { return static_cast<long>(inclusion.size()); }
  long num_inclusions() const {
    long n = 0;
    for (auto v : inclusion) n += v;
    return n;
  }

  double solid_measure() const {
    return static_cast<double>(mesh.count_phase(Phase::Solid)) * mesh.cell_volume();
  }
};

/// Tiles Omega with eps-scaled cells; inclusions sit on lattice cells with theta(k) = 1.
inline EpsilonDomain build_epsilon_domain(const Point& lengths, double epsilon,
                                          const PoreDistribution& theta, const CellGeometry& cell,
                                          int resolution_per_cell) {
  const int n = static_cast<int>(lengths.size());
  if (n != cell.dimension() || n != theta.dimension())
    throw ShapeError("build_epsilon_domain: dimensions of domain, cell and theta differ");
  if (!(epsilon > 0.0)) throw EpsilonNotConforming("build_epsilon_domain: epsilon must be positive");
  if (resolution_per_cell < 1)
    throw ShapeError("build_epsilon_domain: resolution per cell must be positive");
  EpsilonDomain d;
  d.lengths = lengths;
  d.epsilon = epsilon;
  d.resolution_per_cell = resolution_per_cell;
  d.theta_period = theta.declared_period() ? *theta.declared_period() : detect_period(theta);
  d.lattice.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double m = lengths[i] / epsilon;
    const long mi = std::lround(m);
    if (mi < 1 || std::abs(m - static_cast<double>(mi)) > 1e-9 * m)
      throw EpsilonNotConforming("build_epsilon_domain: L/eps = " + std::to_string(m) +
                                 " is not an integer along axis " + std::to_string(i));
    if (mi % d.theta_period[i] != 0)
      throw EpsilonNotConforming("build_epsilon_domain: " + std::to_string(mi) +
                                 " lattice cells along axis " + std::to_string(i) +
                                 " do not tile the theta period " +
                                 std::to_string(d.theta_period[i]));
    d.lattice[i] = mi;
  }
  long total = 1;
  for (long m : d.lattice) total *= m;
  d.inclusion.resize(static_cast<std::size_t>(total));
  LatticePoint k(static_cast<std::size_t>(n));
  for (long c = 0; c < total; ++c) {
    long r = c;
    for (int i = 0; i < n; ++i) {
      k[i] = r % d.lattice[i];
      r /= d.lattice[i];
    }
    d.inclusion[static_cast<std::size_t>(c)] =
        static_cast<std::uint8_t>(theta.periodic_value(k, d.theta_period));
  }
  std::vector<long> cells(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cells[i] = d.lattice[i] * resolution_per_cell;
  d.mesh = BoxMesh(cells, lengths, false);
  d.mesh.tag_cells([&](const Point& x) {
    long lc = 0, stride = 1;
    Point y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = x[i] / epsilon;
      long ki = static_cast<long>(std::floor(t));
      ki = std::min(std::max(ki, 0L), d.lattice[i] - 1);
      y[i] = t - static_cast<double>(ki);
      if (y[i] >= 1.0) y[i] -= 1.0;
      lc += ki * stride;
      stride *= d.lattice[i];
    }
    return d.inclusion[static_cast<std::size_t>(lc)] != 0 && cell.is_solid(y);
  });
  return d;
}

}  // namespace aphom
