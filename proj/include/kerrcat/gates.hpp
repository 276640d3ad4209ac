#pragma once

// Qubit-level matrices. Rotations follow R_P(theta) = exp(-i theta P / 2).

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace kerrcat {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

inline Mat2 pauli_i() { return Mat2::Identity(); }

inline Mat2 pauli_x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Mat2 pauli_y() {
  Mat2 m;
  m << 0.0, std::complex<double>(0.0, -1.0), std::complex<double>(0.0, 1.0), 0.0;
  return m;
}

inline Mat2 pauli_z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// exp(-i theta P / 2) for a Pauli P (P^2 = 1).
inline Mat2 pauli_rotation(const Mat2& p, double theta) {
  return std::cos(0.5 * theta) * Mat2::Identity() - std::complex<double>(0.0, std::sin(0.5 * theta)) * p;
}

inline Mat2 rot_x(double theta) { return pauli_rotation(pauli_x(), theta); }
inline Mat2 rot_y(double theta) { return pauli_rotation(pauli_y(), theta); }
inline Mat2 rot_z(double theta) { return pauli_rotation(pauli_z(), theta); }

/// a (x) b with a acting on the first (A) qubit: index = 2 i_A + i_B.
inline Mat4 kron2(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

/// exp(-i theta XX / 2).
inline Mat4 rot_xx(double theta) {
  const Mat4 xx = kron2(pauli_x(), pauli_x());
  return std::cos(0.5 * theta) * Mat4::Identity() - std::complex<double>(0.0, std::sin(0.5 * theta)) * xx;
}

inline Mat4 iswap() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1.0;
  m(3, 3) = 1.0;
  m(1, 2) = std::complex<double>(0.0, 1.0);
  m(2, 1) = std::complex<double>(0.0, 1.0);
  return m;
}

/// min over global phase of ||a - e^{i phi} b||_F.
template <class M>
double phase_distance(const M& a, const M& b) {
  const std::complex<double> overlap = (b.adjoint() * a).trace();
  const std::complex<double> phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : 1.0;
  return (a - phase * b).norm();
}

}  // namespace kerrcat
