#pragma once

// Two cat qubits coupled by a beamsplitter g(t)(e^{i phi} a_A^dag a_B + h.c.).
//
// Projected on the cat pairs (basis index 2 i_A + i_B) the coupling is
//   H_eff = (g/2)[cos phi (hxA hxB XX + hyA hyB YY) - sin phi (hxA hyB XY - hyA hxB YX)],
// which follows from a = (h_x X + i h_y Y)/2 on each pair.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kerrcat/cat.hpp"
#include "kerrcat/fidelity.hpp"
#include "kerrcat/gates.hpp"
#include "kerrcat/propagator.hpp"
#include "kerrcat/pulses.hpp"

namespace kerrcat {

enum class EchoQubit { A, B };

struct TwoQubitEffectiveModel {
  KerrCatParams params_a, params_b;
  double hx_a = 1.0, hy_a = 1.0, hx_b = 1.0, hy_b = 1.0;
  Envelope coupling;
  double phase = 0.0;
};

inline TwoQubitEffectiveModel make_effective_model(const KerrCatParams& a, const KerrCatParams& b, Envelope coupling,
                                                   double phase = 0.0) {
  a.validate();
  b.validate();
  const auto ha = matrix_elements_alpha2(a.alpha2()), hb = matrix_elements_alpha2(b.alpha2());
  return {a, b, ha.h_x, ha.h_y, hb.h_x, hb.h_y, std::move(coupling), phase};
}

/// H_eff / g: the time-independent shape of the projected coupling.
inline Mat4 effective_generator(const TwoQubitEffectiveModel& m) {
  const Mat2 x = pauli_x(), y = pauli_y();
  const double c = std::cos(m.phase), s = std::sin(m.phase);
  return 0.5 * (c * (m.hx_a * m.hx_b * kron2(x, x) + m.hy_a * m.hy_b * kron2(y, y)) -
                s * (m.hx_a * m.hy_b * kron2(x, y) - m.hy_a * m.hx_b * kron2(y, x)));
}

inline Mat4 effective_interaction(const TwoQubitEffectiveModel& m, double t) {
  return m.coupling(t) * effective_generator(m);
}

/// Simpson integral of an envelope over its window.
inline double envelope_integral(const Envelope& e, int n = 2001) {
  if (!e.active()) return 0.0;
  if (n % 2 == 0) ++n;
  const double T = e.duration();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * e(T * i / (n - 1));
  }
  return acc * T / (n - 1) / 3.0;
}

namespace detail {

/// exp(-i a H) for Hermitian 4x4 H.
inline Mat4 expm_hermitian(const Mat4& h, double a) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  Eigen::Vector4cd ph;
  for (int i = 0; i < 4; ++i) ph(i) = std::exp(std::complex<double>(0.0, -a * es.eigenvalues()(i)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// The coupling commutes with itself at all times, so U = exp(-i (int g) H_eff/g).
inline Mat4 effective_unitary(const TwoQubitEffectiveModel& m, double g_integral) {
  return detail::expm_hermitian(effective_generator(m), g_integral);
}

inline Mat4 effective_unitary(const TwoQubitEffectiveModel& m) {
  return effective_unitary(m, envelope_integral(m.coupling));
}

/// Interaction angle eta = int g h_x^A h_x^B dt.
inline double interaction_angle(const TwoQubitEffectiveModel& m) {
  return envelope_integral(m.coupling) * m.hx_a * m.hx_b;
}

/// Amplitude of a truncated-Gaussian coupling of length T giving angle eta.
inline double coupling_amplitude(double eta, double T, const KerrCatParams& a, const KerrCatParams& b) {
  const double hx = matrix_elements_alpha2(a.alpha2()).h_x * matrix_elements_alpha2(b.alpha2()).h_x;
  return eta / (hx * truncated_gaussian_integral(T));
}

struct EchoResult {
  Mat4 unitary;
  double eta = 0.0;         // angle of each interaction half
  double g0 = 0.0;          // envelope amplitude of each half
  double distance = 0.0;    // phase-optimized Frobenius distance to XX(theta)
  PulseSchedule schedule;   // g(t) for both halves; flips are instantaneous at t = T_half, 2 T_half
};

/// XX(theta) = X_i R(theta/2) X_i R(theta/2), R the coupling pulse of length
/// T_half with angle theta/2. X_i flips anticommute with the Y part, so the
/// YY term cancels; exact for phase = 0.
inline EchoResult echo_xx(double theta, const KerrCatParams& a, const KerrCatParams& b, double t_half,
                          EchoQubit echo = EchoQubit::A, double phase = 0.0) {
  if (!(t_half > 0.0)) fail(ErrorKind::InvalidInput, "interaction time must be positive");
  EchoResult r;
  r.eta = 0.5 * theta;
  r.g0 = coupling_amplitude(r.eta, t_half, a, b);
  const auto model = make_effective_model(a, b, full_pulse(t_half, r.g0), phase);
  const Mat4 half = effective_unitary(model, r.g0 * truncated_gaussian_integral(t_half));
  const Mat4 flip = echo == EchoQubit::A ? kron2(pauli_x(), pauli_i()) : kron2(pauli_i(), pauli_x());
  r.unitary = flip * half * flip * half;
  r.distance = phase_distance(r.unitary, rot_xx(theta));

  PulseSchedule& s = r.schedule;
  s.duration = 2.0 * t_half;
  s.tag = SchemeTag::XX_ECHO;
  const double g0 = r.g0;
  s.channel(PulseChannel::G) = Envelope(2.0 * t_half, EnvelopeKind::Composite, [g0, t_half](double t) {
    return g0 * truncated_gaussian(t_half, t <= t_half ? t : t - t_half);
  });
  s.target = rot_xx(theta);
  s.params = {{"theta", theta}, {"g0", r.g0}, {"t_half", t_half}, {"echo_qubit", echo == EchoQubit::A ? 0.0 : 1.0}};
  return r;
}

// ---------------------------------------------------------------- local invariants

/// Makhlin invariants (G1 complex, G2 real) of a two-qubit gate.
struct MakhlinInvariants {
  std::complex<double> g1;
  double g2;
};

inline MakhlinInvariants makhlin_invariants(const Mat4& u) {
  using C = std::complex<double>;
  Mat4 q;
  const double r = 1.0 / std::sqrt(2.0);
  const C i(0.0, 1.0);
  q << 1, 0, 0, i, 0, i, 1, 0, 0, i, -1, 0, 1, 0, 0, -i;
  q *= r;
  const Mat4 ub = q.adjoint() * u * q;
  const Mat4 m = ub.transpose() * ub;
  const C det = u.determinant();
  const C tr = m.trace();
  const C tr2 = (m * m).trace();
  return {tr * tr / (16.0 * det), ((tr * tr - tr2) / (4.0 * det)).real()};
}

inline Mat4 cnot() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = m(1, 1) = 1.0;
  m(2, 3) = m(3, 2) = 1.0;
  return m;
}

// ---------------------------------------------------------------- full two-mode model

/// Projected generator decomposed on Pauli pairs: coeff(P,Q) = Tr(G P(x)Q)/4.
inline Eigen::Matrix4d pauli_coefficients(const Mat4& g) {
  const Mat2 p[4] = {pauli_i(), pauli_x(), pauli_y(), pauli_z()};
  Eigen::Matrix4d c;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) c(i, j) = (kron2(p[i], p[j]).adjoint() * g).trace().real() / 4.0;
  return c;
}

/// G with M ~ e^{-i G}: polar part of M, principal logarithm, trace removed.
inline Mat4 projected_generator(const Mat4& m) {
  Eigen::JacobiSVD<Mat4> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat4 u = svd.matrixU() * svd.matrixV().adjoint();
  Eigen::ComplexEigenSolver<Mat4> es(u);
  Eigen::Vector4cd lg;
  for (int i = 0; i < 4; ++i) lg(i) = std::complex<double>(0.0, 1.0) * std::log(es.eigenvalues()(i));
  Mat4 g = es.eigenvectors() * lg.asDiagonal() * es.eigenvectors().inverse();
  g = 0.5 * (g + g.adjoint()).eval();
  g -= (g.trace() / 4.0) * Mat4::Identity();
  return g;
}

class TwoModeModel {
 public:
  TwoModeModel(const KerrCatParams& a, const KerrCatParams& b, const FockSpace& space_a, const FockSpace& space_b,
               double phase = 0.0)
      : da_(space_a.dim()), db_(space_b.dim()), ops_(build(a, b, space_a, space_b, phase)) {
    if (da_ > 24 || db_ > 24) fail(ErrorKind::InvalidSpace, "two-mode runs are limited to 24 levels per mode");
    const OscillatorModel ma(a, space_a), mb(b, space_b);
    comp_a_ = ma.computational();
    comp_b_ = mb.computational();
    comp_.resize(da_ * db_, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) comp_.col(2 * i + j) = kron_vec(comp_a_.col(i), comp_b_.col(j));
  }

  TwoModeModel(const TwoModeModel&) = delete;
  TwoModeModel& operator=(const TwoModeModel&) = delete;

  int dim() const noexcept { return da_ * db_; }
  const Matrix& computational() const noexcept { return comp_; }
  const SparseOperatorSum& operators() const noexcept { return ops_; }

  /// Evolves the computational columns under g(t) with static shifts on each mode.
  Matrix evolve(const Envelope& g, double duration, double shift_a, double shift_b, Matrix psi, int steps) const {
    CoefficientFn coeffs = [&g, shift_a, shift_b](double t, std::span<double> out) {
      out[0] = shift_a;
      out[1] = shift_b;
      out[2] = g(t);
    };
    evolve_columns(ops_, coeffs, duration, steps, psi);
    return psi;
  }

  /// Ideal X flip of one pair, identity on its complement.
  Matrix flip(EchoQubit q, const Matrix& psi) const {
    const Matrix& c = q == EchoQubit::A ? comp_a_ : comp_b_;
    const int d = static_cast<int>(c.rows());
    Matrix x = Matrix::Identity(d, d) - c * c.adjoint();
    x += c.col(0) * c.col(1).adjoint() + c.col(1) * c.col(0).adjoint();
    const Matrix ia = Matrix::Identity(da_, da_), ib = Matrix::Identity(db_, db_);
    const Matrix full = q == EchoQubit::A ? kron(x, ib) : kron(ia, x);
    return full * psi;
  }

  Mat4 project(const Matrix& psi) const { return comp_.adjoint() * psi; }

  static Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  }

 private:
  static Vector kron_vec(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (int i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
  }

  static SparseOperatorSum build(const KerrCatParams& a, const KerrCatParams& b, const FockSpace& sa,
                                 const FockSpace& sb, double phase) {
    const HamiltonianAssembly ha(a, sa), hb(b, sb);
    const Matrix ia = Matrix::Identity(sa.dim(), sa.dim()), ib = Matrix::Identity(sb.dim(), sb.dim());
    const Matrix drift = kron(ha.drift(), ib) + kron(ia, hb.drift());
    const Matrix la = build_ladder(sa).matrix, lb = build_ladder(sb).matrix;
    const Matrix hop = std::exp(std::complex<double>(0.0, phase)) * kron(la.adjoint(), lb);
    return SparseOperatorSum(drift, {kron(number_operator(sa).matrix, ib), kron(ia, number_operator(sb).matrix),
                                     Matrix(hop + hop.adjoint())});
  }

  int da_, db_;
  SparseOperatorSum ops_;
  Matrix comp_a_, comp_b_, comp_;
};

/// Projected 4x4 gate of one coupling pulse (no echo).
inline PropagationResult full_two_mode_propagate(const TwoModeModel& model, const Envelope& g, double shift_a,
                                                 double shift_b, int steps = 400) {
  PropagationResult r;
  r.step_count = steps;
  r.dt = g.duration() / steps;
  r.unitary = model.evolve(g, g.duration(), shift_a, shift_b, model.computational(), steps);
  r.unitarity_defect = detail::column_defect(r.unitary, model.computational());
  const Matrix proj = model.project(r.unitary);
  double leak = 0.0;
  for (int c = 0; c < 4; ++c) leak = std::max(leak, 1.0 - proj.col(c).squaredNorm());
  r.max_leakage_flux = leak;
  return r;
}

/// Echoed XX(theta) in the full two-mode model with ideal instantaneous flips.
inline Mat4 full_echo_xx(const TwoModeModel& model, const EchoResult& echo, double t_half, double shift_a,
                         double shift_b, EchoQubit q = EchoQubit::A, int steps = 400) {
  const Envelope g = full_pulse(t_half, echo.g0);
  Matrix psi = model.evolve(g, t_half, shift_a, shift_b, model.computational(), steps);
  psi = model.flip(q, psi);
  psi = model.evolve(g, t_half, shift_a, shift_b, std::move(psi), steps);
  psi = model.flip(q, psi);
  return model.project(psi);
}

}  // namespace kerrcat
