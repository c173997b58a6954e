#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "aphom/ap/pore_distribution.hpp"
#include "aphom/core/fields.hpp"
#include "aphom/geometry/cell_geometry.hpp"
#include "aphom/geometry/mesh.hpp"
#include "aphom/memory/kernel.hpp"

namespace aphom {

/// Coefficients of the fine problem, as functions of the fast variable y.
struct CellCoefficients {
  MatrixField A0;  // skeleton elasticity
  MemoryKernel A1;
  MatrixField B0;  // fluid viscosity
  MemoryKernel B1;
  ScalarProfile rho1;
  ScalarProfile rho2;
  /// Full-cell validation: the elastic cell problem is posed on all of Y with
  /// A0 on the inclusion and this coefficient on the complement.
  std::optional<MatrixField> A0_phase2;

  int dimension() const { return A0.dimension(); }
};

/// Periodic computational cell: the theta period of lattice cells, each with
/// the reference inclusion where theta(k) = 1. With theta == 1 this is Y itself.
struct CellDomain {
  CellGeometry geometry{ShapeSpec{}};
  std::vector<long> period;
  std::vector<std::uint8_t> inclusion;  // theta over the period, axis 0 fastest
  int resolution = 0;                   // mesh cells per lattice unit
  bool full_cell_validation = false;
  BoxMesh mesh;

  int dimension() const { return static_cast<int>(period.size()); }

  double volume() const {
    double v = 1.0;
    for (long p : period) v *= static_cast<double>(p);
    return v;
  }

  /// y reduced into [0, p).
  Point reduce(Point y) const {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = static_cast<double>(period[i]);
      y[i] -= std::floor(y[i] / p) * p;
      if (y[i] >= p) y[i] -= p;
    }
    return y;
  }

  bool is_solid(const Point& y_any) const {
    const Point y = reduce(y_any);
    long k = 0, stride = 1;
    Point local(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      long ki = static_cast<long>(std::floor(y[i]));
      ki = std::min(ki, period[i] - 1);
      local[i] = y[i] - static_cast<double>(ki);
      k += ki * stride;
      stride *= period[i];
    }
    return inclusion[static_cast<std::size_t>(k)] != 0 && geometry.is_solid(local);
  }
};

inline CellDomain build_cell_domain(const CellGeometry& geometry, const PoreDistribution& theta,
                                    int resolution, bool full_cell_validation = false) {
  if (theta.dimension() != geometry.dimension())
    throw ShapeError("build_cell_domain: theta and geometry dimensions differ");
  if (resolution < 4) throw ShapeError("build_cell_domain: resolution must be at least 4");
  if (geometry.validation_only() && !full_cell_validation)
    throw GeometryViolation("build_cell_domain: " + to_string(geometry.shape()) +
                            " geometries touch the cell boundary and are only admitted in "
                            "full-cell validation mode");
  CellDomain d;
  d.geometry = geometry;
  d.period = theta.declared_period() ? *theta.declared_period() : detect_period(theta);
  d.resolution = resolution;
  d.full_cell_validation = full_cell_validation;
  long total = 1;
  for (long p : d.period) total *= p;
  d.inclusion.resize(static_cast<std::size_t>(total));
  LatticePoint k(d.period.size());
  for (long c = 0; c < total; ++c) {
    long r = c;
    for (std::size_t i = 0; i < d.period.size(); ++i) {
      k[i] = r % d.period[i];
      r /= d.period[i];
    }
    d.inclusion[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(theta.periodic_value(k, d.period));
  }
  std::vector<long> cells(d.period.size());
  Point lengths(d.period.size());
  for (std::size_t i = 0; i < d.period.size(); ++i) {
    cells[i] = d.period[i] * resolution;
    lengths[i] = static_cast<double>(d.period[i]);
  }
  d.mesh = BoxMesh(cells, lengths, true);
  d.mesh.tag_cells([&d](const Point& y) { return d.is_solid(y); });
  return d;
}

/// The reference cell Y (theta == 1).
inline CellDomain build_unit_cell_domain(const CellGeometry& geometry, int resolution,
                                         bool full_cell_validation = false) {
  return build_cell_domain(geometry, PoreDistribution::all_ones(geometry.dimension()), resolution,
                           full_cell_validation);
}

}  // namespace aphom
