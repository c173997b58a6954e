#pragma once

#include <string>
#include <vector>

#include "aphom/core/errors.hpp"
#include "aphom/core/types.hpp"

namespace aphom {

/// Nodal vectors at the uniformly spaced steps 0..n.
class FieldHistory {
 public:
  FieldHistory() = default;
  explicit FieldHistory(double dt) : dt_(dt) {
    if (!(dt > 0.0)) throw HistoryError("FieldHistory: time step must be positive");
  }

  double dt() const { return dt_; }
  Index length() const { return static_cast<Index>(values_.size()); }
  Index last_step() const { return length() - 1; }
  void append(Vector v) {
    if (!values_.empty() && v.size() != values_.front().size())
      throw HistoryError("FieldHistory: appended vector has a different size");
    values_.push_back(std::move(v));
  }
  const Vector& operator[](Index n) const { return values_[static_cast<std::size_t>(n)]; }
  void clear() { values_.clear(); }

 private:
  double dt_ = 1.0;
  std::vector<Vector> values_;
};

/// Trapezoidal approximation of  int_0^{t_n} k(t_n - s) g(s) ds.
///   dt [ k_n g_0 / 2 + sum_{j=1}^{n-1} k_{n-j} g_j + k_0 g_n / 2 ]
/// `kernel[i]` holds k(i dt). Cost O(n).
inline Vector volterra_convolve(const std::vector<double>& kernel, const FieldHistory& history, Index n) {
  if (n < 0) throw HistoryError("volterra_convolve: negative step index");
  if (history.length() < n + 1)
    throw HistoryError("volterra_convolve: history holds " + std::to_string(history.length()) +
                       " steps, step " + std::to_string(n) + " requested");
  if (static_cast<Index>(kernel.size()) < n + 1)
    throw HistoryError("volterra_convolve: kernel has fewer than n + 1 samples");
  Vector out = Vector::Zero(history[0].size());
  if (n == 0) return out;
  const double dt = history.dt();
  out += 0.5 * kernel[static_cast<std::size_t>(n)] * history[0];
  for (Index j = 1; j < n; ++j) out += kernel[static_cast<std::size_t>(n - j)] * history[j];
  out += 0.5 * kernel[0] * history[n];
  return dt * out;
}

/// Same quadrature at t_n when only steps 0..n-1 are known: the unknown g_n is
/// replaced by g_{n-1} (explicit treatment of the current-step weight).
inline Vector volterra_convolve_lagged(const std::vector<double>& kernel, const FieldHistory& history,
                                       Index n) {
  if (n < 1) throw HistoryError("volterra_convolve_lagged: step index must be at least 1");
  if (history.length() < n)
    throw HistoryError("volterra_convolve_lagged: history is shorter than the requested step");
  if (static_cast<Index>(kernel.size()) < n + 1)
    throw HistoryError("volterra_convolve_lagged: kernel has fewer than n + 1 samples");
  const double dt = history.dt();
  Vector out = 0.5 * kernel[static_cast<std::size_t>(n)] * history[0];
  for (Index j = 1; j < n; ++j) out += kernel[static_cast<std::size_t>(n - j)] * history[j];
  out += 0.5 * kernel[0] * history[n - 1];
  return dt * out;
}

}  // namespace aphom
