#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

enum class InclusionShape { Disk, AxisBox, Laminate };

inline std::string to_string(InclusionShape s) {
  switch (s) {
    case InclusionShape::Disk: return "disk";
    case InclusionShape::AxisBox: return "box";
    case InclusionShape::Laminate: return "laminate";
  }
  return "unknown";
}

/// Parameters of the solid inclusion Y1 inside Y = (0,1)^N.
struct ShapeSpec {
  int dimension = 2;
  InclusionShape shape = InclusionShape::Disk;
  Point center;       // disk
  double radius = 0;  // disk
  Point corner;       // box
  Point sides;        // box
  int axis = 0;       // laminate: solid where y_axis < thickness
  double thickness = 0.5;
};

/// The reference cell with its solid inclusion Y1 and fluid part Y2.
class CellGeometry {
 public:
  explicit CellGeometry(ShapeSpec spec) : spec_(std::move(spec)) {}

  int dimension() const { return spec_.dimension; }
  const ShapeSpec& spec() const { return spec_; }
  InclusionShape shape() const { return spec_.shape; }

  /// Laminates cross the cell boundary and are only used with full-cell validation.
  bool validation_only() const { return spec_.shape == InclusionShape::Laminate; }

  /// chi_1(y) for y in [0,1)^N.
  bool is_solid(std::span<const double> y) const {
    const int n = dimension();
    switch (spec_.shape) {
      case InclusionShape::Disk: {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) r2 += (y[i] - spec_.center[i]) * (y[i] - spec_.center[i]);
        return r2 < spec_.radius * spec_.radius;
      }
      case InclusionShape::AxisBox: {
        for (int i = 0; i < n; ++i)
          if (y[i] < spec_.corner[i] || y[i] >= spec_.corner[i] + spec_.sides[i]) return false;
        return true;
      }
      case InclusionShape::Laminate:
        return y[spec_.axis] < spec_.thickness;
    }
    return false;
  }

  double chi1(std::span<const double> y) const { return is_solid(y) ? 1.0 : 0.0; }
  double chi2(std::span<const double> y) const { return 1.0 - chi1(y); }

  /// Closed-form |Y1|.
  double exact_solid_fraction() const {
    const int n = dimension();
    switch (spec_.shape) {
      case InclusionShape::Disk: {
        const double r = spec_.radius;
        if (n == 1) return 2.0 * r;
        if (n == 2) return std::numbers::pi * r * r;
        return 4.0 / 3.0 * std::numbers::pi * r * r * r;
      }
      case InclusionShape::AxisBox: {
        double v = 1.0;
        for (double s : spec_.sides) v *= s;
        return v;
      }
      case InclusionShape::Laminate:
        return spec_.thickness;
    }
    return 0.0;
  }

 private:
  ShapeSpec spec_;
};

/// Validates the shape and returns the cell.
inline CellGeometry build_cell(const ShapeSpec& spec) {
  const int n = spec.dimension;
  if (n < 1 || n > 3) throw ShapeError("build_cell: dimension must be 1, 2 or 3");
  switch (spec.shape) {
    case InclusionShape::Disk:
      if (static_cast<int>(spec.center.size()) != n)
        throw ShapeError("build_cell: disk center has wrong dimension");
      if (!(spec.radius > 0.0))
        throw GeometryViolation("build_cell: disk radius must be positive");
      for (int i = 0; i < n; ++i)
        if (spec.center[i] - spec.radius <= 0.0 || spec.center[i] + spec.radius >= 1.0)
          throw GeometryViolation("build_cell: disk of radius " + std::to_string(spec.radius) +
                                  " is not contained in the open cell");
      break;
    case InclusionShape::AxisBox:
      if (static_cast<int>(spec.corner.size()) != n || static_cast<int>(spec.sides.size()) != n)
        throw ShapeError("build_cell: box corner/sides have wrong dimension");
      for (int i = 0; i < n; ++i) {
        if (!(spec.sides[i] > 0.0))
          throw GeometryViolation("build_cell: box sides must be positive");
        if (spec.corner[i] <= 0.0 || spec.corner[i] + spec.sides[i] >= 1.0)
          throw GeometryViolation("build_cell: box is not contained in the open cell");
      }
      break;
    case InclusionShape::Laminate:
      if (spec.axis < 0 || spec.axis >= n) throw ShapeError("build_cell: laminate axis out of range");
      if (!(spec.thickness > 0.0 && spec.thickness < 1.0))
        throw GeometryViolation("build_cell: laminate thickness must lie in (0, 1)");
      break;
  }
  return CellGeometry(spec);
}

inline ShapeSpec disk_spec(int dim, double radius) {
  ShapeSpec s;
  s.dimension = dim;
  s.shape = InclusionShape::Disk;
  s.center.assign(static_cast<std::size_t>(dim), 0.5);
  s.radius = radius;
  return s;
}

inline ShapeSpec box_spec(Point corner, Point sides) {
  ShapeSpec s;
  s.dimension = static_cast<int>(corner.size());
  s.shape = InclusionShape::AxisBox;
  s.corner = std::move(corner);
  s.sides = std::move(sides);
  return s;
}

inline ShapeSpec laminate_spec(int dim, int axis, double thickness) {
  ShapeSpec s;
  s.dimension = dim;
  s.shape = InclusionShape::Laminate;
  s.axis = axis;
  s.thickness = thickness;
  return s;
}

/// (|Y1|, |Y2|) by midpoint quadrature with `resolution` points per axis.
inline std::pair<double, double> volume_fractions(const CellGeometry& g, int resolution) {
  if (resolution < 2) throw ShapeError("volume_fractions: resolution must be at least 2");
  const int n = g.dimension();
  long total = 1;
  for (int i = 0; i < n; ++i) total *= resolution;
  long solid = 0;
  Point y(static_cast<std::size_t>(n));
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (int i = 0; i < n; ++i) {
      y[i] = (static_cast<double>(r % resolution) + 0.5) / resolution;
      r /= resolution;
    }
    if (g.is_solid(y)) ++solid;
  }
  const double f1 = static_cast<double>(solid) / static_cast<double>(total);
  return {f1, 1.0 - f1};
}

}  // namespace aphom
