#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

/// Samples of a function on the unit torus [0,1)^N at the points k / n (row-major).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<long> shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<long>(values_.size()) != count(shape_))
      throw ShapeError("GridFunction: value count does not match the grid shape");
  }

  static GridFunction sample(std::vector<long> shape,
                             const std::function<double(const Point&)>& f) {
    const long total = count(shape);
    std::vector<double> values(static_cast<std::size_t>(total));
    Point y(shape.size());
    for (long n = 0; n < total; ++n) {
      long rest = n;
      for (std::size_t i = shape.size(); i-- > 0;) {
        y[i] = static_cast<double>(rest % shape[i]) / static_cast<double>(shape[i]);
        rest /= shape[i];
      }
      values[static_cast<std::size_t>(n)] = f(y);
    }
    return GridFunction(std::move(shape), std::move(values));
  }

  static GridFunction constant(std::vector<long> shape, double value) {
    const long total = count(shape);
    return GridFunction(std::move(shape),
                        std::vector<double>(static_cast<std::size_t>(total), value));
  }

  int dimension() const { return static_cast<int>(shape_.size()); }
  const std::vector<long>& shape() const { return shape_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  long size() const { return static_cast<long>(values_.size()); }
  double cell_volume() const { return 1.0 / static_cast<double>(size()); }

  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(size());
  }

  /// Discrete L^p norm on the measure-one torus.
  double norm(double p) const {
    double s = 0.0;
    for (double v : values_) s += std::pow(std::abs(v), p);
    return std::pow(s / static_cast<double>(size()), 1.0 / p);
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  static long count(const std::vector<long>& shape) {
    long total = 1;
    for (long n : shape) {
      if (n < 1) throw ShapeError("GridFunction: extents must be positive");
      total *= n;
    }
    return total;
  }

 private:
  std::vector<long> shape_;
  std::vector<double> values_;
};

namespace detail {

/// In-place N-d DFT by successive 1-D transforms along each axis.
inline void fft_nd(std::vector<Complex>& data, const std::vector<long>& shape, bool inverse) {
  Eigen::FFT<double> fft;
  const long total = static_cast<long>(data.size());
  long stride = 1;
  for (std::size_t axis = shape.size(); axis-- > 0;) {
    const long n = shape[axis];
    std::vector<Complex> line(static_cast<std::size_t>(n)), out;
    const long block = stride * n;
    for (long base = 0; base < total; base += block) {
      for (long off = 0; off < stride; ++off) {
        for (long j = 0; j < n; ++j)
          line[static_cast<std::size_t>(j)] = data[static_cast<std::size_t>(base + off + j * stride)];
        if (inverse)
          fft.inv(out, line);
        else
          fft.fwd(out, line);
        for (long j = 0; j < n; ++j)
          data[static_cast<std::size_t>(base + off + j * stride)] = out[static_cast<std::size_t>(j)];
      }
    }
    stride *= n;
  }
}

}  // namespace detail

/// Discrete Fourier coefficients c_k = (1/|grid|) sum_j u_j exp(-2 pi i k.j/n).
inline std::vector<Complex> fourier_coefficients(const GridFunction& u) {
  std::vector<Complex> data(u.values().begin(), u.values().end());
  detail::fft_nd(data, u.shape(), false);
  const double scale = u.cell_volume();
  for (auto& c : data) c *= scale;
  return data;
}

/// (u * v)(s) = int_T u(r) v(s - r) dr on the measure-one torus, via the DFT.
inline GridFunction torus_convolve(const GridFunction& u, const GridFunction& v) {
  if (u.shape() != v.shape())
    throw ShapeError("torus_convolve: operands are sampled on different grids");
  std::vector<Complex> a(u.values().begin(), u.values().end());
  std::vector<Complex> b(v.values().begin(), v.values().end());
  detail::fft_nd(a, u.shape(), false);
  detail::fft_nd(b, v.shape(), false);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  detail::fft_nd(a, u.shape(), true);
  // Eigen's inverse already divides by the length of each axis; one factor of
  // the cell volume remains from the quadrature of the convolution integral.
  std::vector<double> out(a.size());
  const double h = u.cell_volume();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real() * h;
  return GridFunction(u.shape(), std::move(out));
}

}  // namespace aphom
