#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aphom/core/errors.hpp"

namespace aphom {

using LatticePoint = std::vector<long>;

/// Finite window of the pore distribution theta : Z^N -> {0, 1}.
/// theta(k) = 1 marks lattice cells carrying a skeleton inclusion.
class PoreDistribution {
 public:
  PoreDistribution(std::vector<long> shape, std::vector<std::uint8_t> values,
                   std::optional<std::vector<long>> declared_period = std::nullopt)
      : shape_(std::move(shape)), values_(std::move(values)),
        declared_period_(std::move(declared_period)) {
    if (shape_.empty()) throw ShapeError("PoreDistribution: empty shape");
    long total = 1;
    for (long n : shape_) {
      if (n < 1) throw ShapeError("PoreDistribution: window extents must be positive");
      total *= n;
    }
    if (static_cast<long>(values_.size()) != total)
      throw ShapeError("PoreDistribution: expected " + std::to_string(total) +
                       " values, got " + std::to_string(values_.size()));
    for (auto v : values_)
      if (v > 1) throw ShapeError("PoreDistribution: values must be exactly 0 or 1");
    if (declared_period_) check_declared_period();
  }

  /// Window filled by evaluating `theta` on {0..shape-1}.
  static PoreDistribution from_function(std::vector<long> shape,
                                        const std::function<int(const LatticePoint&)>& theta,
                                        std::optional<std::vector<long>> period = std::nullopt) {
    long total = 1;
    for (long n : shape) total *= n;
    std::vector<std::uint8_t> values(static_cast<std::size_t>(total));
    LatticePoint k(shape.size());
    for (long n = 0; n < total; ++n) {
      unravel(n, shape, k);
      values[static_cast<std::size_t>(n)] = static_cast<std::uint8_t>(theta(k) != 0);
    }
    return PoreDistribution(std::move(shape), std::move(values), std::move(period));
  }

  /// theta == 1 everywhere: the periodic porous medium.
  static PoreDistribution all_ones(int dim, long extent = 2) {
    std::vector<long> shape(static_cast<std::size_t>(dim), extent);
    return from_function(shape, [](const LatticePoint&) { return 1; },
                         std::vector<long>(static_cast<std::size_t>(dim), 1));
  }

  int dimension() const { return static_cast<int>(shape_.size()); }
  const std::vector<long>& shape() const { return shape_; }
  const std::vector<std::uint8_t>& values() const { return values_; }
  const std::optional<std::vector<long>>& declared_period() const { return declared_period_; }
  void set_declared_period(std::vector<long> p) {
    declared_period_ = std::move(p);
    check_declared_period();
  }

  /// In-window value; k must satisfy 0 <= k_i < shape_i.
  int at(const LatticePoint& k) const { return values_[static_cast<std::size_t>(ravel(k))]; }

  /// theta(k) for any k in Z^N, reconstructed from one period.
  int periodic_value(const LatticePoint& k, const std::vector<long>& period) const {
    LatticePoint r(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      long m = k[i] % period[i];
      if (m < 0) m += period[i];
      r[i] = m;
    }
    return at(r);
  }

  /// Sub-window starting at `offset` with extents `shape`.
  PoreDistribution subwindow(const LatticePoint& offset, std::vector<long> shape) const {
    for (std::size_t i = 0; i < shape.size(); ++i)
      if (offset[i] < 0 || offset[i] + shape[i] > shape_[i])
        throw ShapeError("PoreDistribution: sub-window exceeds the window");
    return from_function(shape, [&](const LatticePoint& k) {
      LatticePoint g(k.size());
      for (std::size_t i = 0; i < k.size(); ++i) g[i] = k[i] + offset[i];
      return at(g);
    });
  }

  long size() const { return static_cast<long>(values_.size()); }

  long ravel(const LatticePoint& k) const {
    long n = 0;
    for (std::size_t i = 0; i < shape_.size(); ++i) n = n * shape_[i] + k[i];
    return n;
  }

  static void unravel(long n, const std::vector<long>& shape, LatticePoint& k) {
    for (std::size_t i = shape.size(); i-- > 0;) {
      k[i] = n % shape[i];
      n /= shape[i];
    }
  }

 private:
  void check_declared_period() const {
    const auto& p = *declared_period_;
    if (p.size() != shape_.size())
      throw ShapeError("PoreDistribution: declared period has wrong dimension");
    for (long v : p)
      if (v < 1) throw ShapeError("PoreDistribution: declared period must be positive");
    LatticePoint k(shape_.size()), kp(shape_.size());
    for (long n = 0; n < size(); ++n) {
      unravel(n, shape_, k);
      bool inside = true;
      for (std::size_t i = 0; i < k.size(); ++i) {
        kp[i] = k[i] + p[i];
        inside = inside && kp[i] < shape_[i];
      }
      if (inside && at(kp) != at(k))
        throw ShapeError("PoreDistribution: declared period is violated inside the window");
    }
  }

  std::vector<long> shape_;
  std::vector<std::uint8_t> values_;
  std::optional<std::vector<long>> declared_period_;
};

/// sup over in-window pairs of |theta(k + shift) - theta(k)|; 0 when no pair fits.
inline double translate_discrepancy(const PoreDistribution& theta, const LatticePoint& shift) {
  const auto& shape = theta.shape();
  LatticePoint k(shape.size()), kp(shape.size());
  double sup = 0.0;
  for (long n = 0; n < theta.size(); ++n) {
    PoreDistribution::unravel(n, shape, k);
    bool inside = true;
    for (std::size_t i = 0; i < k.size() && inside; ++i) {
      kp[i] = k[i] + shift[i];
      inside = kp[i] >= 0 && kp[i] < shape[i];
    }
    if (!inside) continue;
    sup = std::max(sup, static_cast<double>(std::abs(theta.at(kp) - theta.at(k))));
  }
  return sup;
}

/// Smallest per-axis periods p with theta(k + p_i e_i) = theta(k) on the window.
///
/// Candidates along each axis are scanned in increasing order up to half the
/// window extent. A {0,1}-valued sequence whose translate differs from it by
/// less than 1/2 in sup norm coincides with it, so the first candidate with
/// discrepancy below 1/2 is an exact period.
inline std::vector<long> detect_period(const PoreDistribution& theta) {
  const int dim = theta.dimension();
  std::vector<long> period(static_cast<std::size_t>(dim), 0);
  for (int axis = 0; axis < dim; ++axis) {
    const long extent = theta.shape()[axis];
    LatticePoint shift(static_cast<std::size_t>(dim), 0);
    for (long p = 1; 2 * p <= extent; ++p) {
      shift[axis] = p;
      if (translate_discrepancy(theta, shift) < 0.5) {
        period[axis] = p;
        break;
      }
    }
    if (period[axis] == 0)
      throw NoPeriodInWindow("detect_period: no period along axis " + std::to_string(axis) +
                             " within a window of extent " + std::to_string(extent));
  }
  return period;
}

/// Row-major 0/1 text, one line per slice of the last axis.
inline std::string to_text(const PoreDistribution& theta) {
  std::ostringstream out;
  const long last = theta.shape().back();
  for (long n = 0; n < theta.size(); ++n) {
    out << static_cast<int>(theta.values()[static_cast<std::size_t>(n)]);
    out << ((n + 1) % last == 0 ? '\n' : ' ');
  }
  return out.str();
}

}  // namespace aphom
