#pragma once

// Fixed-pattern sparse Hermitian operators and the Chebyshev expansion of
// exp(-i H dt) applied to a block of state vectors.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "kerrcat/fock.hpp"

namespace kerrcat {

/// CSR sparsity pattern shared by the drift and every coupling of an operator sum.
struct SparsePattern {
  int dim = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<int> diag_pos;  // index of (i, i) in cols, or -1
};

/// A Hermitian operator stored on a SparsePattern.
class SparseHermitian {
 public:
  SparseHermitian() = default;
  explicit SparseHermitian(const SparsePattern* pattern)
      : pattern_(pattern), values_(pattern->cols.size(), cplx{0.0, 0.0}) {}

  int dim() const noexcept { return pattern_->dim; }
  std::vector<cplx>& values() noexcept { return values_; }
  const std::vector<cplx>& values() const noexcept { return values_; }
  const SparsePattern& pattern() const noexcept { return *pattern_; }

  /// out = (H - shift) * in * scale, column by column.
  void apply(const Matrix& in, Matrix& out, double shift = 0.0, double scale = 1.0) const {
    const int d = pattern_->dim;
    const int ncols = static_cast<int>(in.cols());
    out.resize(d, ncols);
    const int* rp = pattern_->row_ptr.data();
    const int* cj = pattern_->cols.data();
    const cplx* v = values_.data();
    for (int c = 0; c < ncols; ++c) {
      const cplx* x = in.col(c).data();
      cplx* y = out.col(c).data();
      for (int i = 0; i < d; ++i) {
        cplx acc = -shift * x[i];
        for (int k = rp[i]; k < rp[i + 1]; ++k) acc += v[k] * x[cj[k]];
        y[i] = acc * scale;
      }
    }
  }

  /// Gershgorin enclosure [lo, hi] of the spectrum.
  std::pair<double, double> spectral_bounds() const {
    const int d = pattern_->dim;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < d; ++i) {
      double center = 0.0, radius = 0.0;
      for (int k = pattern_->row_ptr[i]; k < pattern_->row_ptr[i + 1]; ++k) {
        if (pattern_->cols[k] == i) {
          center = values_[k].real();
        } else {
          radius += std::abs(values_[k]);
        }
      }
      if (i == 0) {
        lo = center - radius;
        hi = center + radius;
      } else {
        lo = std::min(lo, center - radius);
        hi = std::max(hi, center + radius);
      }
    }
    return {lo, hi};
  }

  Matrix to_dense() const {
    const int d = pattern_->dim;
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = pattern_->row_ptr[i]; k < pattern_->row_ptr[i + 1]; ++k) m(i, pattern_->cols[k]) = values_[k];
    return m;
  }

 private:
  const SparsePattern* pattern_ = nullptr;
  std::vector<cplx> values_;
};

/// drift + sum_k c_k * coupling_k on a common sparsity pattern, so that a
/// time step only needs an O(nnz) scalar combination.
class SparseOperatorSum {
 public:
  SparseOperatorSum(const Matrix& drift, const std::vector<Matrix>& couplings) {
    const int d = static_cast<int>(drift.rows());
    pattern_.dim = d;
    pattern_.row_ptr.assign(d + 1, 0);
    pattern_.diag_pos.assign(d, -1);
    auto nonzero = [&](int i, int j) {
      if (drift(i, j) != cplx{0.0, 0.0}) return true;
      for (const auto& m : couplings)
        if (m(i, j) != cplx{0.0, 0.0}) return true;
      return false;
    };
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i == j || nonzero(i, j)) {
          if (i == j) pattern_.diag_pos[i] = static_cast<int>(pattern_.cols.size());
          pattern_.cols.push_back(j);
        }
      }
      pattern_.row_ptr[i + 1] = static_cast<int>(pattern_.cols.size());
    }
    drift_ = gather(drift);
    couplings_.reserve(couplings.size());
    for (const auto& m : couplings) couplings_.push_back(gather(m));
  }

  SparseOperatorSum(const SparseOperatorSum&) = delete;
  SparseOperatorSum& operator=(const SparseOperatorSum&) = delete;

  int dim() const noexcept { return pattern_.dim; }
  int num_couplings() const noexcept { return static_cast<int>(couplings_.size()); }
  const SparsePattern& pattern() const noexcept { return pattern_; }
  std::size_t nnz() const noexcept { return pattern_.cols.size(); }

  SparseHermitian make() const { return SparseHermitian(&pattern_); }

  /// out = drift_scale * drift + sum_k coeffs[k] * coupling_k.
  void assemble(std::span<const double> coeffs, SparseHermitian& out, double drift_scale = 1.0) const {
    auto& v = out.values();
    const std::size_t n = v.size();
    for (std::size_t k = 0; k < n; ++k) v[k] = drift_scale * drift_[k];
    for (std::size_t c = 0; c < couplings_.size() && c < coeffs.size(); ++c) {
      const double s = coeffs[c];
      if (s == 0.0) continue;
      const auto& src = couplings_[c];
      for (std::size_t k = 0; k < n; ++k) v[k] += s * src[k];
    }
  }

 private:
  std::vector<cplx> gather(const Matrix& m) const {
    std::vector<cplx> out(pattern_.cols.size());
    for (int i = 0; i < pattern_.dim; ++i)
      for (int k = pattern_.row_ptr[i]; k < pattern_.row_ptr[i + 1]; ++k) out[k] = m(i, pattern_.cols[k]);
    return out;
  }

  SparsePattern pattern_;
  std::vector<cplx> drift_;
  std::vector<std::vector<cplx>> couplings_;
};

/// J_0(z) ... J_m(z) by Miller's backward recurrence.
inline void bessel_j_sequence(double z, int m, std::vector<double>& out) {
  out.assign(m + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return;
  }
  const int start = m + 20 + static_cast<int>(std::sqrt(40.0 * (m + 1)));
  const int top = start + (start % 2);
  double next = 0.0, cur = 1e-300, norm = 0.0;
  for (int k = top; k > 0; --k) {
    const double prev = (2.0 * k / z) * cur - next;
    next = cur;
    cur = prev;  // cur = J_{k-1}
    if (k - 1 <= m) out[k - 1] = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      for (auto& x : out) x *= 1e-250;
      norm *= 1e-250;
      next *= 1e-250;
      cur *= 1e-250;
    }
  }
  norm += cur;  // J_0
  for (auto& x : out) x /= norm;
}

/// Applies exp(-i H dt) to a block of columns by a Chebyshev expansion on a
/// Gershgorin enclosure of the spectrum. Truncation error is below `tol`
/// per unit-norm column.
class ChebyshevPropagator {
 public:
  explicit ChebyshevPropagator(double tol = 1e-15) : tol_(tol) {}

  int last_order() const noexcept { return last_order_; }

  void apply(const SparseHermitian& h, double dt, Matrix& psi) {
    auto [lo, hi] = h.spectral_bounds();
    const double center = 0.5 * (hi + lo);
    double radius = 0.5 * (hi - lo);
    const cplx global = std::exp(cplx{0.0, -center * dt});
    if (radius * std::abs(dt) < 1e-300) {
      psi *= global;
      last_order_ = 0;
      return;
    }
    radius *= 1.0 + 1e-12;
    const double z = radius * dt;
    const int m_guess = static_cast<int>(std::ceil(std::abs(z) + 12.0 * std::cbrt(std::abs(z)) + 30.0));
    bessel_j_sequence(std::abs(z), m_guess, bessel_);
    int m = m_guess;
    while (m > 1 && std::abs(bessel_[m]) < 0.25 * tol_ && m > std::abs(z)) --m;
    last_order_ = m;

    // coefficients (2 - delta_k0) (-i sign(dt))^k J_k(|z|)
    const cplx step = dt >= 0 ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
    const double inv_r = 1.0 / radius;
    phi0_ = psi;
    h.apply(phi0_, phi1_, center, inv_r);
    acc_ = bessel_[0] * phi0_;
    cplx phase = step;
    acc_ += (2.0 * bessel_[1]) * phase * phi1_;
    for (int k = 2; k <= m; ++k) {
      h.apply(phi1_, phi2_, center, 2.0 * inv_r);
      phi2_ -= phi0_;
      phase *= step;
      acc_ += (2.0 * bessel_[k]) * phase * phi2_;
      std::swap(phi0_, phi1_);
      std::swap(phi1_, phi2_);
    }
    psi = global * acc_;
  }

 private:
  double tol_;
  int last_order_ = 0;
  std::vector<double> bessel_;
  Matrix phi0_, phi1_, phi2_, acc_;
};

}  // namespace kerrcat
