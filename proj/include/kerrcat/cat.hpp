#pragma once

// Closed-form Kerr-cat quantities: cat vectors, single-photon matrix elements,
// the drive-phase to rotation-axis map and the projected number operator.

#include <cmath>
#include <numbers>

#include "kerrcat/fock.hpp"

namespace kerrcat {

struct CatBasis {
  double alpha = 0.0;
  Vector plus;   // |C+> = (|alpha> + |-alpha>)/N+
  Vector minus;  // |C-> = (|alpha> - |-alpha>)/N-
  double norm_plus = 0.0;
  double norm_minus = 0.0;
};

inline double cat_norm(double alpha, int sign) {
  return std::sqrt(2.0 * (1.0 + sign * std::exp(-2.0 * alpha * alpha)));
}

/// Cat vectors from the coherent-state expansion e^{-a^2/2} a^n / sqrt(n!).
/// At alpha = 0 the odd cat is the limit |n=1>.
inline CatBasis cat_vectors(double alpha, const FockSpace& space) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidInput, "cat amplitude must be >= 0");
  const int d = space.dim();
  const double a2 = alpha * alpha;
  if (!(d > a2 + 8.0 * std::sqrt(a2 + 1.0)))
    fail(ErrorKind::Truncation, "Fock dimension too small for cat amplitude");
  CatBasis out;
  out.alpha = alpha;
  out.norm_plus = cat_norm(alpha, 1);
  out.norm_minus = cat_norm(alpha, -1);
  out.plus = Vector::Zero(d);
  out.minus = Vector::Zero(d);
  if (alpha == 0.0) {
    out.plus(0) = 1.0;
    out.minus(1) = 1.0;
    return out;
  }
  // coefficients c_n = alpha^n / sqrt(n!) built recursively
  double c = 1.0;
  for (int n = 0; n < d; ++n) {
    if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
    if (n % 2 == 0) {
      out.plus(n) = c;
    } else {
      out.minus(n) = c;
    }
  }
  // normalise directly: sum over even (odd) n of c_n^2 equals cosh (sinh) of alpha^2
  out.plus /= out.plus.norm();
  out.minus /= out.minus.norm();
  return out;
}

struct MatrixElements {
  double h_x;
  double h_y;
};

/// h_x = 2 alpha / sqrt(1 - e^{-4 alpha^2}), h_y = h_x e^{-2 alpha^2}; both 1 at alpha = 0.
inline MatrixElements matrix_elements(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidInput, "cat amplitude must be >= 0");
  const double a2 = alpha * alpha;
  if (a2 < 1e-8) {
    // series of 2a/sqrt(1 - e^{-4a^2}) = 1 + a^2 + ...
    const double hx = 1.0 + a2 + a2 * a2 / 6.0;
    return {hx, hx * std::exp(-2.0 * a2)};
  }
  const double hx = 2.0 * alpha / std::sqrt(-std::expm1(-4.0 * a2));
  return {hx, hx * std::exp(-2.0 * a2)};
}

inline MatrixElements matrix_elements_alpha2(double alpha2) { return matrix_elements(std::sqrt(alpha2)); }

/// Ladder operator projected on the cat pair, a -> (h_x X + i h_y Y)/2, as a 2x2 matrix.
inline Eigen::Matrix2cd projected_ladder(double alpha) {
  const auto h = matrix_elements(alpha);
  Eigen::Matrix2cd a;
  a << 0.0, 0.5 * (h.h_x + h.h_y), 0.5 * (h.h_x - h.h_y), 0.0;
  return a;
}

struct DriveAxis {
  double phi_tilde;  // drive phase
  double phi;        // Bloch azimuthal angle of the rotation axis
  double h_phi;      // matrix-element magnitude
};

/// phi = arg(cos phi~ - i sin phi~ e^{-2 alpha^2}), h_phi = h_x sqrt(cos^2 + sin^2 e^{-4 alpha^2}).
inline DriveAxis axis_from_drive_phase(double phi_tilde, double alpha) {
  const auto h = matrix_elements(alpha);
  const double s = std::exp(-2.0 * alpha * alpha);
  const cplx z{std::cos(phi_tilde), -std::sin(phi_tilde) * s};
  return {phi_tilde, std::arg(z), h.h_x * std::abs(z)};
}

/// Inverse map: the drive phase (in (-pi, pi]) that rotates about azimuth phi.
inline DriveAxis drive_phase_from_axis(double phi, double alpha) {
  const double s = std::exp(-2.0 * alpha * alpha);
  // cos phi~ = r cos phi, -sin phi~ s = r sin phi  =>  phi~ = atan2(-sin phi / s, cos phi)
  const double phi_tilde = std::atan2(-std::sin(phi) / s, std::cos(phi));
  return axis_from_drive_phase(phi_tilde, alpha);
}

/// Large-cat asymptote h_phi ~ h_x e^{-2 alpha^2} / |sin phi| (phi != m pi).
inline double h_phi_asymptotic(double phi, double alpha) {
  return matrix_elements(alpha).h_x * std::exp(-2.0 * alpha * alpha) / std::abs(std::sin(phi));
}

struct ProjectedNumber {
  double identity_coeff;  // (<n>+ + <n>-)/2
  double z_coeff;         // (<n>+ - <n>-)/2
  double identity_asymptotic;  // alpha^2
  double z_asymptotic;         // -2 alpha^2 e^{-2 alpha^2}
};

/// a^dag a restricted to the cat pair, exact and large-cat forms.
inline ProjectedNumber projected_number_operator(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidInput, "cat amplitude must be >= 0");
  const double a2 = alpha * alpha;
  double n_plus, n_minus;
  if (a2 == 0.0) {
    n_plus = 0.0;
    n_minus = 1.0;
  } else {
    n_plus = a2 * std::tanh(a2);
    n_minus = a2 / std::tanh(a2);
  }
  return {0.5 * (n_plus + n_minus), 0.5 * (n_plus - n_minus), a2, -2.0 * a2 * std::exp(-2.0 * a2)};
}

}  // namespace kerrcat
