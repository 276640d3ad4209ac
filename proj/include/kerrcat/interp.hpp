#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "kerrcat/error.hpp"

namespace kerrcat {

/// Piecewise cubic Hermite interpolant on strictly increasing nodes. Outside
/// the node range it extrapolates linearly with the end slopes.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
      : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    if (x_.size() < 2 || y_.size() != x_.size() || m_.size() != x_.size())
      fail(ErrorKind::InvalidInput, "interpolant needs >= 2 matching nodes");
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
      if (!(x_[i + 1] > x_[i])) fail(ErrorKind::InvalidInput, "interpolation nodes must increase");
  }

  bool empty() const { return x_.empty(); }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front() + m_.front() * (x - x_.front());
    if (x >= x_.back()) return y_.back() + m_.back() * (x - x_.back());
    const std::size_t j = segment(x);
    const double h = x_[j + 1] - x_[j];
    const double t = (x - x_[j]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[j] + (t3 - 2 * t2 + t) * h * m_[j] + (-2 * t3 + 3 * t2) * y_[j + 1] +
           (t3 - t2) * h * m_[j + 1];
  }

  double derivative(double x) const {
    if (x <= x_.front()) return m_.front();
    if (x >= x_.back()) return m_.back();
    const std::size_t j = segment(x);
    const double h = x_[j + 1] - x_[j];
    const double t = (x - x_[j]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y_[j] + (-6 * t2 + 6 * t) * y_[j + 1]) / h + (3 * t2 - 4 * t + 1) * m_[j] +
           (3 * t2 - 2 * t) * m_[j + 1];
  }

 protected:
  std::size_t segment(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return std::min(static_cast<std::size_t>(it - x_.begin()) - 1, x_.size() - 2);
  }

  std::vector<double> x_, y_, m_;
};

/// Fritsch-Carlson monotone cubic: Hermite slopes limited so that monotone
/// data stay monotone.
inline CubicHermite monotone_cubic(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::InvalidInput, "interpolant needs >= 2 matching nodes");
  std::vector<double> h(n - 1), s(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) fail(ErrorKind::InvalidInput, "interpolation nodes must increase");
    s[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = s[0];
  m[n - 1] = s[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i - 1] * s[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
    m[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
  }
  return CubicHermite(std::move(x), std::move(y), std::move(m));
}

/// Natural cubic spline through (x, y).
inline CubicHermite natural_spline(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::InvalidInput, "interpolant needs >= 2 matching nodes");
  if (n == 2) {
    const double s = (y[1] - y[0]) / (x[1] - x[0]);
    return CubicHermite(std::move(x), std::move(y), {s, s});
  }
  // second derivatives by the tridiagonal system, then convert to Hermite slopes
  std::vector<double> h(n - 1), alpha(n, 0.0), l(n, 1.0), mu(n, 0.0), z(n, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];
  for (std::size_t i = 1; i + 1 < n; ++i)
    alpha[i] = 3.0 / h[i] * (y[i + 1] - y[i]) - 3.0 / h[i - 1] * (y[i] - y[i - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    l[i] = 2.0 * (x[i + 1] - x[i - 1]) - h[i - 1] * mu[i - 1];
    mu[i] = h[i] / l[i];
    z[i] = (alpha[i] - h[i - 1] * z[i - 1]) / l[i];
  }
  for (std::size_t j = n - 1; j-- > 0;) c[j] = z[j] - mu[j] * c[j + 1];
  std::vector<double> m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) m[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (c[i + 1] + 2.0 * c[i]) / 3.0;
  const std::size_t k = n - 2;
  m[n - 1] = (y[n - 1] - y[k]) / h[k] + h[k] * (2.0 * c[n - 1] + c[k]) / 3.0;
  return CubicHermite(std::move(x), std::move(y), std::move(m));
}

}  // namespace kerrcat
