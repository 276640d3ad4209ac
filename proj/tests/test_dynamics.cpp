// Pulse schedules, propagation and projected infidelity.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "kerrcat/fidelity.hpp"
#include "kerrcat/pulses.hpp"
#include "oracle_values.hpp"

using namespace kerrcat;
using std::numbers::pi;

namespace {

PulseSchedule idle(double T, const Matrix& target = Mat2::Identity()) {
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::Z_STRAIGHT;
  s.target = target;
  return s;
}

bool throws_kind(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------- envelopes

TEST(Envelope, TruncatedGaussianOracle) {
  EXPECT_NEAR(truncated_gaussian(1.0, 0.25), oracle::kGaussQuarter, 1e-15);
  EXPECT_NEAR(truncated_gaussian(8.0, 2.0), oracle::kGaussQuarter, 1e-15);
  EXPECT_NEAR(truncated_gaussian_integral(1.0), oracle::kGaussIntegral, 1e-13);
  EXPECT_NEAR(truncated_gaussian_integral(30.0), 30.0 * oracle::kGaussIntegral, 1e-12);
  EXPECT_DOUBLE_EQ(truncated_gaussian(5.0, 2.5), 1.0);
  EXPECT_NEAR(truncated_gaussian(5.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(truncated_gaussian(5.0, 5.0), 0.0, 1e-15);
  EXPECT_THROW(truncated_gaussian(5.0, 5.1), Error);
  EXPECT_THROW(truncated_gaussian(0.0, 0.0), Error);
}

TEST(Envelope, DerivativeMatchesFiniteDifference) {
  const double T = 12.0, h = 1e-6;
  for (double t = 0.3; t < T; t += 1.1) {
    const double fd = (truncated_gaussian(T, t + h) - truncated_gaussian(T, t - h)) / (2 * h);
    EXPECT_NEAR(truncated_gaussian_deriv(T, t), fd, 1e-9);
  }
  EXPECT_NEAR(truncated_gaussian_deriv(T, 0.0), 0.0, 1e-15);
}

TEST(Envelope, ZeroOutsideWindow) {
  const auto e = full_pulse(10.0, 2.0);
  EXPECT_EQ(e(-1.0), 0.0);
  EXPECT_EQ(e(10.5), 0.0);
  EXPECT_DOUBLE_EQ(e(5.0), 2.0);
  EXPECT_FALSE(Envelope().active());
}

// ---------------------------------------------------------------- schemes

TEST(SchemeX, SeedGivesQuarterTurn) {
  for (double a2 : {0.5, 2.0, 3.0}) {
    const double amp = x_seed(30.0, a2);
    EXPECT_NEAR(amp * matrix_elements_alpha2(a2).h_x * truncated_gaussian_integral(30.0), pi / 2, 1e-14);
  }
  const auto s = scheme_x(30.0, 0.1, KerrCatParams::from_alpha2(2.0));
  EXPECT_TRUE(s.single_photon());
  EXPECT_LT((s.target - Matrix(rot_x(pi / 2))).norm(), 1e-15);
  EXPECT_THROW(scheme_x(-1.0, 0.1, KerrCatParams::from_alpha2(2.0)), Error);
}

TEST(SchemeY, InvalidRamps) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(20);
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidRamp, [&] { scheme_y_drag(20.0, 0.3, 0.1, p, DragMode::Off, space); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidRamp, [&] { scheme_y_drag(20.0, 0.3, -2.5, p, DragMode::Off, space); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidRamp, [&] { scheme_z_straight(20.0, 0.2, 0.5, p); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidRamp, [&] { scheme_z_straight(20.0, 0.2, -3.0, p); }));
  EXPECT_NO_THROW(scheme_y_drag(20.0, 0.3, -2.0, p, DragMode::Off, space));
}

TEST(SchemeY, DragOffHasNoQuadrature) {
  const auto s = scheme_y_drag(20.0, 0.3, -1.0, KerrCatParams::from_alpha2(2.0), DragMode::Off, FockSpace(20));
  EXPECT_FALSE(s.channel(PulseChannel::EpsX).active());
  EXPECT_TRUE(s.channel(PulseChannel::Eps2Mod).active());
}

TEST(SchemeY, ExactDragMatchesOracle) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const auto s = scheme_y_drag(20.0, 0.3, -1.0, p, DragMode::Exact, FockSpace(40));
  EXPECT_NEAR(s.controls(5.0).eps_x, oracle::kDragExact_a2_2_T20_t5_re, 2e-6);
  EXPECT_LT(std::abs(oracle::kDragExact_a2_2_T20_t5_im), 1e-9);
  // quadrature vanishes with the envelope slope
  EXPECT_NEAR(s.controls(10.0).eps_x, 0.0, 1e-12);
}

TEST(SchemeY, ExactDragCancelsNonAdiabaticCoupling) {
  // at a table node: <v1|dv0/dphi> = G(phi) <v1|xim|v0> in the real frame
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(40);
  const double ey = 0.3, e2 = -1.0, phi = 0.5;
  const DragProfile g(DragMode::Exact, ey, e2, p, space);
  const auto ops = detail::y_frame_ops(p, space);
  const RealMatrix vdot = e2 * ops.two + ey * ops.y;
  auto top_pair = [&](double x, const RealVector* r0, const RealVector* r1) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(ops.h0 + x * vdot);
    const int d = space.dim();
    RealVector a = es.eigenvectors().col(d - 1), b = es.eigenvectors().col(d - 2);
    if (r0 && std::abs(b.dot(*r0)) > std::abs(a.dot(*r0))) std::swap(a, b);
    if (r0 && a.dot(*r0) < 0) a = -a;
    if (r1 && b.dot(*r1) < 0) b = -b;
    return std::make_pair(a, b);
  };
  // orient: v0 continues from (C+ + C-)/sqrt 2
  const auto idle_spec = diagonalize_labeled(Matrix(ops.h0.cast<cplx>()), Matrix(ops.parity.cast<cplx>().asDiagonal()));
  const RealVector ref0 =
      (idle_spec.states.col(idle_spec.comp0).real() + idle_spec.states.col(idle_spec.comp1).real()) / std::sqrt(2.0);
  auto [v0, v1] = top_pair(phi, &ref0, nullptr);
  auto dv0 = [&](double h) {
    const auto up = top_pair(phi + h, &v0, &v1), dn = top_pair(phi - h, &v0, &v1);
    return RealVector((up.first - dn.first) / (2 * h));
  };
  const RealVector d0 = (4.0 * dv0(5e-4) - dv0(1e-3)) / 3.0;
  const double lhs = v1.dot(d0);
  const double rhs = g(phi) * v1.dot(ops.xim * v0);
  EXPECT_NEAR(lhs, rhs, 1e-8);
  EXPECT_GT(std::abs(lhs), 1e-3);
}

TEST(SchemeY, ApproxDragSameScaleAsExact) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(40);
  const DragProfile ex(DragMode::Exact, 0.3, -1.0, p, space), ap(DragMode::Approx, 0.3, -1.0, p, space);
  for (double phi : {0.0, 0.5, 1.0}) {
    EXPECT_TRUE(std::isfinite(ap(phi)));
    EXPECT_TRUE(std::isfinite(ex(phi)));
  }
  const double r = ap(0.5) / ex(0.5);
  EXPECT_GT(r, 0.2);
  EXPECT_LT(r, 5.0);
  EXPECT_EQ(DragProfile(DragMode::Exact, 0.0, -1.0, p, space).mode(), DragMode::Off);
}

TEST(SchemeZ, RobustLineScheduleClosesAndFollowsLine) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(40);
  const double T = 30.0, tau = 6.0;
  const auto s = scheme_z_robustline(T, tau, -1.0, p, space);
  EXPECT_NEAR(s.controls(0.0).detuning, 0.0, 1e-14);
  EXPECT_NEAR(s.controls(T).detuning, 0.0, 1e-14);
  EXPECT_NEAR(s.controls(tau).detuning, robust_line(2.0, space), 1e-6);
  for (double t = tau + 0.1; t < T - tau; t += 0.7) {
    const auto c = s.controls(t);
    EXPECT_LT(std::abs(gap_point_raw(c.detuning, p.eps2_0 + c.eps2, 1.0, 40).deriv), 1e-6) << t;
  }
  EXPECT_LT((s.target - Matrix(rot_z(-pi / 2))).norm(), 1e-15);
  EXPECT_THROW(scheme_z_robustline(T, 16.0, -1.0, p, space), Error);
  // ramp below the tabulated range
  EXPECT_TRUE(throws_kind(ErrorKind::SchemeInfeasible, [&] { scheme_z_robustline(T, tau, -1.9, p, space); }));
}

TEST(SchemeZ, StraightLineBelowRobustLineHasPositiveDerivative) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(40);
  const auto s = scheme_z_straight(30.0, 0.25, -0.5, p);
  const auto tr = trajectory(s, p, space, 301);
  for (std::size_t i = 1; i + 1 < tr.t.size(); ++i) EXPECT_GT(tr.deriv[i], 0.0);
  const auto m = angle_model(s, p, space);
  EXPECT_LT(m.slope, 0.0);
  EXPECT_LT(m.theta0, 0.0);
  EXPECT_NEAR(m(0.01), m.theta0 + 0.01 * m.slope, 1e-15);
  EXPECT_THROW(angle_model(scheme_x(10.0, 0.1, p), p, space), Error);
}

TEST(SchemeKerr, Schedule) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const auto s = scheme_kerr_gate(p);
  EXPECT_DOUBLE_EQ(s.duration, pi);
  EXPECT_DOUBLE_EQ(s.controls(1.0).eps2, -2.0);
  EXPECT_DOUBLE_EQ(s.controls(1.0).detuning, -0.5);
  EXPECT_LT((s.target - Matrix(rot_z(pi / 2))).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(kerr_gate_infidelity_model(2.0, 0.01, pi), 2.0 * 1e-4 * pi * pi);
}

// ---------------------------------------------------------------- propagation

TEST(Propagator, BareOscillatorPhases) {
  const FockSpace space(4);
  const auto p = KerrCatParams::from_alpha2(0.0);
  const auto r = propagate(idle(7.0), p, 0.1, space);
  for (int n = 0; n < 4; ++n) {
    const double e = 0.1 * n - 0.5 * n * (n - 1);
    EXPECT_LT(std::abs(r.unitary(n, n) - std::exp(-kI * e * 7.0)), 1e-10) << n;
  }
  EXPECT_LT((r.unitary - Matrix(r.unitary.diagonal().asDiagonal())).norm(), 1e-14);
}

TEST(Propagator, XGateOracle) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const OscillatorModel model(p, FockSpace(30));
  const auto s = scheme_x(30.0, x_seed(30.0, 2.0), p);
  PropagationOptions mid;
  mid.integrator = Integrator::Midpoint;
  mid.default_steps = 3000;
  EXPECT_NEAR(gate_infidelity(model, s, 0.0, mid), oracle::kXGate_a2_2_T30_D0, 1e-12);
  EXPECT_NEAR(gate_infidelity(model, s, 5e-3, mid), oracle::kXGate_a2_2_T30_D5em3, 1e-12);
  // default CF4 grid agrees with the fine midpoint reference
  EXPECT_NEAR(gate_infidelity(model, s, 5e-3), oracle::kXGate_a2_2_T30_D5em3, 1e-9);
}

TEST(Propagator, KerrGateOracle) {
  const std::pair<double, double> cases[] = {
      {1.5, oracle::kKerrGate_1p5_D5em3}, {2.0, oracle::kKerrGate_2p0_D5em3}, {3.0, oracle::kKerrGate_3p0_D5em3}};
  for (const auto& [a2, ref] : cases) {
    const auto p = KerrCatParams::from_alpha2(a2);
    const OscillatorModel model(p, FockSpace(40));
    EXPECT_NEAR(gate_infidelity(model, scheme_kerr_gate(p), 5e-3), ref, 1e-9 * ref + 1e-15) << a2;
    EXPECT_LT(gate_infidelity(model, scheme_kerr_gate(p), 0.0), 1e-8) << a2;
  }
}

TEST(Propagator, UnitaryAndParityBlocks) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(20);
  const auto rx = propagate(scheme_x(10.0, x_seed(10.0, 2.0), p), p, 0.0, space);
  EXPECT_LT(rx.unitarity_defect, 1e-10);
  const auto rz = propagate(scheme_z_straight(10.0, 0.3, -0.5, p), p, 2e-3, space);
  EXPECT_LT(rz.unitarity_defect, 1e-10);
  double off = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      if ((i + j) % 2) off = std::max(off, std::abs(rz.unitary(i, j)));
  EXPECT_EQ(off, 0.0);
}

TEST(Propagator, StepDoublingConverges) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const OscillatorModel model(p, FockSpace(30));
  const auto s = scheme_z_straight(30.0, 0.3, -0.8, p);
  PropagationOptions a, b, c;
  b.default_steps = 800;
  c.default_steps = 1600;
  const auto ra = propagate_states(model, s, 1e-3, model.computational(), a);
  const auto rb = propagate_states(model, s, 1e-3, model.computational(), b);
  const auto rc = propagate_states(model, s, 1e-3, model.computational(), c);
  const double e1 = (ra.unitary - rb.unitary).norm(), e2 = (rb.unitary - rc.unitary).norm();
  EXPECT_LT(e1, 1e-7);
  // fourth order: halving the step cuts the error 16x
  EXPECT_NEAR(e1 / e2, 16.0, 3.0);
  EXPECT_LT(std::abs(gate_infidelity(model, s, 1e-3, a) - gate_infidelity(model, s, 1e-3, b)), 1e-10);
  EXPECT_EQ(rb.step_count, 800);
}

TEST(Propagator, TimeReversal) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const OscillatorModel model(p, FockSpace(24));
  const auto s = scheme_x(20.0, x_seed(20.0, 2.0), p);
  Matrix psi = model.computational();
  const auto coeffs = model.coefficients(s, 3e-3);
  evolve_columns(model.operators(), coeffs, s.duration, 300, psi);
  EXPECT_GT((psi - model.computational()).norm(), 0.1);
  evolve_columns(model.operators(), coeffs, s.duration, 300, psi, Integrator::CF4, true);
  EXPECT_LT((psi - model.computational()).norm(), 1e-10);
}

TEST(Propagator, AdiabaticityDiagnostic) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const FockSpace space(30);
  EXPECT_EQ(adiabaticity_diagnostic(idle(10.0), p, space), 0.0);
  const double fast = adiabaticity_diagnostic(scheme_z_robustline(10.0, 2.0, -1.0, p, space), p, space);
  const double slow = adiabaticity_diagnostic(scheme_z_robustline(40.0, 8.0, -1.0, p, space), p, space);
  EXPECT_GT(fast, 2.0 * slow);
  EXPECT_GT(slow, 0.0);
}

TEST(Propagator, NonFiniteControlIsRejected) {
  const auto p = KerrCatParams::from_alpha2(1.0);
  const OscillatorModel model(p, FockSpace(10));
  auto s = idle(5.0);
  s.channel(PulseChannel::Delta) =
      Envelope(5.0, EnvelopeKind::Composite, [](double t) { return t > 2.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; });
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidInput, [&] { propagate_states(model, s, 0.0, model.computational()); }));
}

TEST(Propagator, TraceErrorMatchesStaticShift) {
  const auto p = KerrCatParams::from_alpha2(1.0);
  const OscillatorModel model(p, FockSpace(16));
  const auto s = scheme_z_straight(10.0, 0.2, 0.0, p);
  const DetuningTrace flat{{0.0, 10.0}, {4e-3, 4e-3}};
  const auto a = propagate_states(model, s, flat, model.computational());
  const auto b = propagate_states(model, s, 4e-3, model.computational());
  EXPECT_LT((a.unitary - b.unitary).norm(), 1e-14);
}

// ---------------------------------------------------------------- fidelity

TEST(Fidelity, TrivialCases) {
  const Matrix v = rot_x(pi / 2);
  EXPECT_NEAR(infidelity(v, v), 0.0, 1e-15);
  EXPECT_NEAR(infidelity(Matrix(std::exp(kI * 0.7) * v), v), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(infidelity(Matrix::Zero(2, 2), v), 1.0);
  EXPECT_NEAR(infidelity(Matrix(rot_x(-pi / 2)), v), 1.0, 1e-15);
  EXPECT_THROW(infidelity(Matrix::Identity(3, 3), v), Error);
}

TEST(Fidelity, SimpsonWeights) {
  const auto w = simpson_weights(11);
  double sum = 0.0, cubic = 0.0;
  const auto x = linspace(-1.0, 1.0, 11);
  for (int i = 0; i < 11; ++i) {
    sum += w[i];
    cubic += w[i] * (x[i] * x[i] * x[i] + 3.0 * x[i] * x[i]);
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_NEAR(cubic, 1.0, 1e-14);  // mean of x^3 + 3x^2 on [-1, 1]
  EXPECT_THROW(simpson_weights(10), Error);
  EXPECT_THROW(simpson_weights(1), Error);
}

TEST(Fidelity, TwoLevelTruncationIsDetuningSymmetric) {
  // in a two-level space sigma_x conjugation maps Delta -> -Delta for an X drive
  const auto p = KerrCatParams::from_alpha2(0.0);
  const OscillatorModel model(p, FockSpace(2));
  const auto s = scheme_x(10.0, x_seed(10.0, 0.0), p);
  for (double d : {1e-3, 5e-3, 0.02}) {
    const double a = gate_infidelity(model, s, d), b = gate_infidelity(model, s, -d);
    EXPECT_NEAR(a, b, 1e-13) << d;
    EXPECT_GT(a, 0.0);
  }
}

TEST(Fidelity, SimpsonAverageTracksFineTrapezoid) {
  const auto p = KerrCatParams::from_alpha2(2.0);
  const OscillatorModel model(p, FockSpace(24));
  const auto s = scheme_x(30.0, x_seed(30.0, 2.0), p);
  const auto g = average_infidelity(model, s, 5e-3, 11);
  const auto fine = average_infidelity(model, s, 5e-3, 101);
  double trap = 0.0;
  for (int i = 0; i < 101; ++i) trap += (i == 0 || i == 100 ? 0.5 : 1.0) * fine.infidelities[i];
  trap /= 100.0;
  EXPECT_NEAR(g.average / trap, 1.0, 0.10);
  EXPECT_EQ(g.deltas.front(), -5e-3);
  EXPECT_EQ(g.deltas.back(), 5e-3);
}

TEST(Fidelity, BareIdleDephasing) {
  const auto p = KerrCatParams::from_alpha2(0.0);
  const OscillatorModel model(p, FockSpace(6));
  const double T = 20.0;
  for (double d : {1e-3, 0.01, 0.05}) {
    EXPECT_NEAR(gate_infidelity(model, idle(T), d), std::pow(std::sin(0.5 * d * T), 2), 1e-12) << d;
  }
  EXPECT_THROW(average_infidelity(model, idle(T), 0.0), Error);
}
