#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "aphom/core/errors.hpp"
#include "aphom/core/fields.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

/// Separable memory kernel  k(y, tau) = q(tau) K(y), q one-periodic in the fast time.
struct MemoryKernel {
  MatrixField spatial;
  /// q sampled at tau_j = j / M, j = 0..M-1.
  std::vector<double> temporal;
  /// Declared continuity in fast time; Fourier treatment requires it.
  bool continuous = true;
  /// Exact temporal profile when known (used for q(t/eps) at arbitrary t).
  TrigPolynomial temporal_profile{1};

  bool is_zero() const {
    if (spatial.empty()) return true;
    for (double v : temporal)
      if (v != 0.0) return false;
    return true;
  }

  int samples() const { return static_cast<int>(temporal.size()); }

  /// q(tau) for any tau: the exact profile if set, else periodic linear interpolation.
  double q(double tau) const {
    if (!temporal_profile.empty()) {
      const double t[1] = {tau};
      return temporal_profile.real_value(t);
    }
    const int m = samples();
    if (m == 0) return 0.0;
    double s = (tau - std::floor(tau)) * m;
    const int i = static_cast<int>(std::floor(s)) % m;
    s -= std::floor(s);
    return (1.0 - s) * temporal[static_cast<std::size_t>(i)] + s * temporal[static_cast<std::size_t>((i + 1) % m)];
  }

  /// Kernel from a trigonometric temporal profile, sampled on M points.
  static MemoryKernel from_profile(MatrixField spatial, const TrigPolynomial& q, int samples = 16) {
    if (samples < 2) throw KernelError("MemoryKernel: at least two fast-time samples are required");
    MemoryKernel k;
    k.spatial = std::move(spatial);
    k.temporal_profile = q;
    k.temporal.resize(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) {
      const double t[1] = {static_cast<double>(j) / samples};
      k.temporal[static_cast<std::size_t>(j)] = q.real_value(t);
    }
    return k;
  }

  static MemoryKernel zero(int dim, int samples = 16) {
    MemoryKernel k;
    k.spatial = MatrixField(dim);
    k.temporal.assign(static_cast<std::size_t>(samples), 0.0);
    return k;
  }
};

/// Temporal Fourier coefficients c_m of q, m = 0..M-1 in FFT order (m > M/2 are negative).
inline std::vector<Complex> temporal_modes(const MemoryKernel& k) {
  if (k.samples() < 2) throw KernelError("temporal_modes: at least two fast-time samples are required");
  if (!k.continuous)
    throw KernelError("temporal_modes: kernel is declared discontinuous in fast time; its Fourier "
                      "series does not converge uniformly");
  Eigen::FFT<double> fft;
  std::vector<Complex> in(k.temporal.begin(), k.temporal.end()), out;
  fft.fwd(out, in);
  for (auto& c : out) c /= static_cast<double>(k.samples());
  return out;
}

/// Signed frequency of FFT slot m.
inline int mode_frequency(int m, int samples) { return m <= samples / 2 ? m : m - samples; }

/// Per-mode complex matrix fields  c_m K(y)  evaluated at the given points.
struct KernelModes {
  std::vector<int> frequency;
  /// modes[m][p]: complex N x N matrix of mode m at point p.
  std::vector<std::vector<ComplexMatrix>> modes;
};

inline KernelModes kernel_fast_time_modes(const MemoryKernel& k, const std::vector<Point>& points) {
  const auto c = temporal_modes(k);
  KernelModes out;
  std::vector<Matrix> spatial;
  spatial.reserve(points.size());
  for (const auto& p : points) spatial.push_back(k.spatial(p));
  for (int m = 0; m < k.samples(); ++m) {
    out.frequency.push_back(mode_frequency(m, k.samples()));
    std::vector<ComplexMatrix> field;
    field.reserve(points.size());
    for (const auto& s : spatial) field.push_back(c[static_cast<std::size_t>(m)] * s.cast<Complex>());
    out.modes.push_back(std::move(field));
  }
  return out;
}

/// Inverse of temporal_modes.
inline std::vector<double> temporal_samples_from_modes(const std::vector<Complex>& modes) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(modes), out;
  for (auto& c : in) c *= static_cast<double>(in.size());
  fft.inv(out, in);
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
  return r;
}

/// Fast-time mean M_tau(q): the only kernel content seen by tau-independent fields.
inline double temporal_mean(const MemoryKernel& k) {
  if (k.temporal.empty()) return 0.0;
  double s = 0.0;
  for (double v : k.temporal) s += v;
  return s / static_cast<double>(k.temporal.size());
}

/// y -> M_tau(k)(y), evaluated at the given points.
inline std::vector<Matrix> effective_time_average(const MemoryKernel& k, const std::vector<Point>& points) {
  const double mean = temporal_mean(k);
  std::vector<Matrix> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(k.spatial.empty() ? Matrix::Zero(k.spatial.dimension(), k.spatial.dimension()) : Matrix(mean * k.spatial(p)));
  return out;
}

/// Samples q((i dt) / eps), i = 0..n, of the physical-time kernel.
inline std::vector<double> physical_kernel_samples(const MemoryKernel& k, double dt, double epsilon, Index n) {
  std::vector<double> s(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i <= n; ++i) s[static_cast<std::size_t>(i)] = k.q(static_cast<double>(i) * dt / epsilon);
  return s;
}

}  // namespace aphom
