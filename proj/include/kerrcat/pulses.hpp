#pragma once

// Control schedules: truncated-Gaussian envelopes and the gate schemes built
// from them (X, Y with DRAG, the two adiabatic Z schemes and the Kerr gate).

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kerrcat/cat.hpp"
#include "kerrcat/fock.hpp"
#include "kerrcat/gates.hpp"
#include "kerrcat/interp.hpp"
#include "kerrcat/spectral.hpp"

namespace kerrcat {

namespace detail {
inline constexpr double kGaussFloor = 0.88249690258459546;  // e^{-1/8}
}

/// f(t) = [(e^{-(t/T - 1/2)^2/2} - e^{-1/8}) / (1 - e^{-1/8})]^2 on [0, T].
inline double truncated_gaussian(double T, double t) {
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "pulse duration must be positive");
  const double slack = 1e-12 * T;
  if (!(t >= -slack && t <= T + slack)) fail(ErrorKind::InvalidInput, "time outside the pulse window");
  const double u = std::clamp(t / T, 0.0, 1.0) - 0.5;
  const double g = (std::exp(-0.5 * u * u) - detail::kGaussFloor) / (1.0 - detail::kGaussFloor);
  return g * g;
}

inline double truncated_gaussian_deriv(double T, double t) {
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "pulse duration must be positive");
  const double slack = 1e-12 * T;
  if (!(t >= -slack && t <= T + slack)) fail(ErrorKind::InvalidInput, "time outside the pulse window");
  const double u = std::clamp(t / T, 0.0, 1.0) - 0.5;
  const double e = std::exp(-0.5 * u * u);
  const double g = (e - detail::kGaussFloor) / (1.0 - detail::kGaussFloor);
  const double dg = -u * e / (T * (1.0 - detail::kGaussFloor));
  return 2.0 * g * dg;
}

/// Integral of f over [0, T] in closed form via erf.
inline double truncated_gaussian_integral(double T) {
  const double c = detail::kGaussFloor;
  const double pi = std::numbers::pi;
  const double unit = (std::sqrt(pi) * std::erf(0.5) - 2.0 * c * std::sqrt(2.0 * pi) * std::erf(0.5 / std::sqrt(2.0)) +
                       c * c) / ((1.0 - c) * (1.0 - c));
  return T * unit;
}

enum class EnvelopeKind { FullPulse, RampUp, RampDown, Constant, Composite };

/// A control waveform on [0, duration]; zero outside. An empty envelope is an
/// inactive channel.
class Envelope {
 public:
  using Fn = std::function<double(double)>;

  Envelope() = default;
  Envelope(double duration, EnvelopeKind kind, Fn value, Fn deriv = {})
      : duration_(duration), kind_(kind), value_(std::move(value)), deriv_(std::move(deriv)) {}

  bool active() const noexcept { return static_cast<bool>(value_); }
  double duration() const noexcept { return duration_; }
  EnvelopeKind kind() const noexcept { return kind_; }

  double operator()(double t) const {
    if (!value_ || t < 0.0 || t > duration_) return 0.0;
    return value_(t);
  }

  double derivative(double t) const {
    if (!value_ || t < 0.0 || t > duration_) return 0.0;
    if (deriv_) return deriv_(t);
    const double h = 1e-6 * duration_;
    const double a = std::max(0.0, t - h), b = std::min(duration_, t + h);
    return (value_(b) - value_(a)) / (b - a);
  }

  std::vector<std::pair<double, double>> samples(int n) const {
    std::vector<std::pair<double, double>> out(n);
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : duration_ * i / (n - 1);
      out[i] = {t, (*this)(t)};
    }
    return out;
  }

 private:
  double duration_ = 0.0;
  EnvelopeKind kind_ = EnvelopeKind::Constant;
  Fn value_;
  Fn deriv_;
};

/// amplitude * f(t) over the whole window.
inline Envelope full_pulse(double T, double amplitude) {
  return {T, EnvelopeKind::FullPulse, [T, amplitude](double t) { return amplitude * truncated_gaussian(T, t); },
          [T, amplitude](double t) { return amplitude * truncated_gaussian_deriv(T, t); }};
}

inline Envelope constant_envelope(double T, double value) {
  return {T, EnvelopeKind::Constant, [value](double) { return value; }, [](double) { return 0.0; }};
}

enum class SchemeTag { X, Y_DRAG, Z_ROBUSTLINE, Z_STRAIGHT, KERR_GATE, XX_ECHO };

inline std::string to_string(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::X: return "X";
    case SchemeTag::Y_DRAG: return "Y_DRAG";
    case SchemeTag::Z_ROBUSTLINE: return "Z_ROBUSTLINE";
    case SchemeTag::Z_STRAIGHT: return "Z_STRAIGHT";
    case SchemeTag::KERR_GATE: return "KERR_GATE";
    case SchemeTag::XX_ECHO: return "XX_ECHO";
  }
  return "?";
}

enum class PulseChannel { Delta = 0, Eps2Mod = 1, EpsX = 2, EpsY = 3, G = 4 };
inline constexpr int kNumPulseChannels = 5;
inline constexpr int kDefaultSamples = 2000;

struct PulseSchedule {
  double duration = 0.0;
  std::array<Envelope, kNumPulseChannels> channels{};
  Matrix target;
  std::map<std::string, double> params;
  SchemeTag tag = SchemeTag::X;
  int sample_count = kDefaultSamples;

  const Envelope& channel(PulseChannel c) const { return channels[static_cast<int>(c)]; }
  Envelope& channel(PulseChannel c) { return channels[static_cast<int>(c)]; }

  ChannelValues controls(double t) const {
    return {channel(PulseChannel::Delta)(t), channel(PulseChannel::Eps2Mod)(t), channel(PulseChannel::EpsX)(t),
            channel(PulseChannel::EpsY)(t)};
  }

  ChannelValues control_rates(double t) const {
    return {channel(PulseChannel::Delta).derivative(t), channel(PulseChannel::Eps2Mod).derivative(t),
            channel(PulseChannel::EpsX).derivative(t), channel(PulseChannel::EpsY).derivative(t)};
  }

  double coupling(double t) const { return channel(PulseChannel::G)(t); }

  /// True if a single-photon drive breaks parity somewhere in the schedule.
  bool single_photon() const { return channel(PulseChannel::EpsX).active() || channel(PulseChannel::EpsY).active(); }

  std::vector<double> sample_times() const { return linspace(0.0, duration, sample_count); }

  void write_csv(std::ostream& os) const {
    os << "t,delta,eps2_mod,eps_x,eps_y,g\n";
    os.precision(17);
    for (double t : sample_times()) {
      const auto c = controls(t);
      os << t << ',' << c.detuning << ',' << c.eps2 << ',' << c.eps_x << ',' << c.eps_y << ',' << coupling(t) << '\n';
    }
  }
};

// ---------------------------------------------------------------- X

/// Amplitude that gives a pi/2 rotation in the two-level projection:
/// theta = eps_x0 h_x int f dt.
inline double x_seed(double T, double alpha2, double angle = std::numbers::pi / 2) {
  return angle / (matrix_elements_alpha2(alpha2).h_x * truncated_gaussian_integral(T));
}

inline PulseSchedule scheme_x(double T, double eps_x0, const KerrCatParams& params) {
  params.validate();
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "gate time must be positive");
  if (!std::isfinite(eps_x0)) fail(ErrorKind::InvalidInput, "non-finite drive amplitude");
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::X;
  s.channel(PulseChannel::EpsX) = full_pulse(T, eps_x0);
  s.target = rot_x(std::numbers::pi / 2);
  s.params = {{"eps_x0", eps_x0}};
  return s;
}

// ---------------------------------------------------------------- Y + DRAG

enum class DragMode { Exact, Approx, Off };

inline std::string to_string(DragMode m) {
  switch (m) {
    case DragMode::Exact: return "exact";
    case DragMode::Approx: return "approx";
    case DragMode::Off: return "off";
  }
  return "?";
}

namespace detail {

/// Real operators of the Y-drive problem in the frame D = diag(i^n), where
/// H_02y becomes real symmetric:
///   D^dag (a^2 + a^dag^2)/2 D = -(a^2 + a^dag^2)/2
///   D^dag (-i)(a - a^dag)/2 D = (a + a^dag)/2
///   D^dag (a + a^dag)/2 D     = i (a - a^dag)/2
struct YFrameOps {
  RealMatrix h0;    // drift at delta = params.delta
  RealMatrix two;   // image of the eps2 channel
  RealMatrix y;     // image of the eps_y channel
  RealMatrix xim;   // eps_x channel = i * xim
  RealVector parity;
};

inline YFrameOps y_frame_ops(const KerrCatParams& p, const FockSpace& space) {
  const int d = space.dim();
  RealMatrix a = RealMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const RealMatrix ad = a.transpose();
  const RealMatrix a2 = a * a, ad2 = ad * ad;
  YFrameOps ops;
  RealMatrix num = RealMatrix::Zero(d, d);
  for (int n = 0; n < d; ++n) num(n, n) = n;
  ops.two = -0.5 * (a2 + ad2);
  ops.h0 = p.delta * num - 0.5 * p.kerr * (ad2 * a2) + p.eps2_0 * ops.two;
  ops.y = 0.5 * (a + ad);
  ops.xim = 0.5 * (a - ad);
  ops.parity.resize(d);
  for (int n = 0; n < d; ++n) ops.parity(n) = n % 2 == 0 ? 1.0 : -1.0;
  return ops;
}

}  // namespace detail

/// DRAG profile G(phi) such that eps_x(t) = fdot(t) G(f(t)), phi = f(t) in [0, 1].
///
/// Exact mode cancels <psi1|psi0dot> + i (eps_x/2) <psi1|H_x|psi0> on the
/// instantaneous eigenstates of H_02y, tracked by overlap from |+-i>.
/// Approx mode uses instantaneous-cat matrix elements and excited energies.
class DragProfile {
 public:
  DragProfile(DragMode mode, double eps_y0, double eps2_ramp0, const KerrCatParams& params, const FockSpace& space,
              int nodes = 257)
      : mode_(mode) {
    if (mode == DragMode::Off || eps_y0 == 0.0) {
      mode_ = DragMode::Off;
      return;
    }
    std::vector<double> phi(nodes), g(nodes);
    for (int k = 0; k < nodes; ++k) phi[k] = static_cast<double>(k) / (nodes - 1);
    if (mode == DragMode::Exact) {
      exact_table(phi, g, eps_y0, eps2_ramp0, params, space);
    } else {
      approx_table(phi, g, eps_y0, eps2_ramp0, params, space);
    }
    g_ = natural_spline(std::move(phi), std::move(g));
  }

  DragMode mode() const noexcept { return mode_; }
  double operator()(double phi) const { return mode_ == DragMode::Off ? 0.0 : g_(phi); }

 private:
  static void exact_table(const std::vector<double>& phi, std::vector<double>& g, double eps_y0, double eps2_ramp0,
                          const KerrCatParams& params, const FockSpace& space) {
    const auto ops = detail::y_frame_ops(params, space);
    const int d = space.dim();
    const RealMatrix v_dot = eps2_ramp0 * ops.two + eps_y0 * ops.y;

    // |+-i> in the rotated frame are (C+' +- C-')/sqrt 2 with real C' from the idle spectrum
    Matrix h0c = ops.h0.cast<cplx>();
    const auto idle = diagonalize_labeled(h0c, Matrix(ops.parity.cast<cplx>().asDiagonal()));
    const RealVector cp = idle.states.col(idle.comp0).real();
    const RealVector cm = idle.states.col(idle.comp1).real();
    RealVector prev0 = (cp + cm) / std::sqrt(2.0);
    RealVector prev1 = (cp - cm) / std::sqrt(2.0);

    const int n = static_cast<int>(phi.size());
    for (int k = 1; k < n; ++k) {
      const RealMatrix h = ops.h0 + phi[k] * v_dot;
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
      const int window = std::min(d, 8);
      auto pick = [&](const RealVector& ref, int exclude) {
        int best = -1;
        double ov = -1.0;
        for (int j = d - 1; j >= d - window; --j) {
          if (j == exclude) continue;
          const double o = std::abs(ref.dot(es.eigenvectors().col(j)));
          if (o > ov) {
            ov = o;
            best = j;
          }
        }
        if (ov < 0.9) fail(ErrorKind::AdiabaticityLoss, "lost track of the driven computational states");
        return best;
      };
      const int i0 = pick(prev0, -1);
      const int i1 = pick(prev1, i0);
      RealVector v0 = es.eigenvectors().col(i0), v1 = es.eigenvectors().col(i1);
      if (v0.dot(prev0) < 0) v0 = -v0;
      if (v1.dot(prev1) < 0) v1 = -v1;
      const double e01 = es.eigenvalues()(i0) - es.eigenvalues()(i1);
      const double num = v1.dot(v_dot * v0);
      const double m = v1.dot(ops.xim * v0);
      if (e01 == 0.0 || m == 0.0) fail(ErrorKind::IllConditioned, "DRAG denominator vanishes");
      g[k] = num / (e01 * m);
      prev0 = std::move(v0);
      prev1 = std::move(v1);
    }
    // phi = 0 is a degenerate point; the profile extends smoothly onto it
    g[0] = 3.0 * g[1] - 3.0 * g[2] + g[3];
  }

  static void approx_table(const std::vector<double>& phi, std::vector<double>& g, double eps_y0,
                           double eps2_ramp0, const KerrCatParams& params, const FockSpace& space) {
    const int d = space.dim();
    const Matrix a = build_ladder(space).matrix;
    const Matrix hy = -kI * (a - a.adjoint());
    const Matrix parity = parity_operator(space).matrix;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double eps2 = params.eps2_0 + eps2_ramp0 * phi[k];
      const double alpha2 = std::max(0.0, eps2 / params.kerr);
      const auto h = matrix_elements_alpha2(alpha2);
      KerrCatParams inst = params;
      inst.eps2_0 = std::max(0.0, eps2);
      const auto spec = diagonalize_labeled(build_hamiltonian(inst, space).matrix, parity);
      const double e_comp = 0.5 * (spec.energy(0) + spec.energy(1));
      const double e2 = spec.energy(2) - e_comp, e3 = spec.energy(3) - e_comp;
      const double h12 = std::abs(spec.state(2).dot(hy * spec.state(1)));
      const double h03 = std::abs(spec.state(3).dot(hy * spec.state(0)));
      g[k] = eps_y0 * (h12 * h12 / e2 - h03 * h03 / e3) / (4.0 * h.h_y * h.h_x);
      (void)d;
    }
  }

  DragMode mode_;
  CubicHermite g_;
};

/// Amplitude giving a pi/2 Y rotation in the projected model:
/// theta = eps_y0 int f(t) h_y(alpha^2(t)) dt.
inline double y_seed(double T, double eps2_ramp0, const KerrCatParams& params, double angle = std::numbers::pi / 2) {
  const int n = 401;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = T * i / (n - 1);
    const double f = truncated_gaussian(T, t);
    const double a2 = std::max(0.0, (params.eps2_0 + eps2_ramp0 * f) / params.kerr);
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f * matrix_elements_alpha2(a2).h_y;
  }
  acc *= T / (n - 1) / 3.0;
  return angle / acc;
}

inline PulseSchedule scheme_y_drag(double T, double eps_y0, double eps2_ramp0, const KerrCatParams& params,
                                   DragMode drag_mode, const FockSpace& space) {
  params.validate();
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "gate time must be positive");
  if (!std::isfinite(eps_y0) || !std::isfinite(eps2_ramp0)) fail(ErrorKind::InvalidInput, "non-finite amplitude");
  if (eps2_ramp0 > 0.0) fail(ErrorKind::InvalidRamp, "two-photon modulation must be <= 0");
  if (params.eps2_0 + eps2_ramp0 < -1e-12 * params.kerr)
    fail(ErrorKind::InvalidRamp, "cat size would become negative during the ramp");
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::Y_DRAG;
  s.channel(PulseChannel::EpsY) = full_pulse(T, eps_y0);
  if (eps2_ramp0 != 0.0) s.channel(PulseChannel::Eps2Mod) = full_pulse(T, eps2_ramp0);
  if (drag_mode != DragMode::Off && eps_y0 != 0.0) {
    auto profile = std::make_shared<const DragProfile>(drag_mode, eps_y0, eps2_ramp0, params, space);
    s.channel(PulseChannel::EpsX) = Envelope(T, EnvelopeKind::Composite, [T, profile](double t) {
      return truncated_gaussian_deriv(T, t) * (*profile)(truncated_gaussian(T, t));
    });
  }
  s.target = rot_y(std::numbers::pi / 2);
  s.params = {{"eps_y0", eps_y0}, {"eps2_ramp0", eps2_ramp0}, {"drag", static_cast<double>(drag_mode)}};
  return s;
}

// ---------------------------------------------------------------- Z schemes

/// Smallest cat size the shared robust-line tables cover; below it the
/// robust point sits on a sharp avoided crossing.
inline constexpr double kRobustLineFloor = 0.25;

/// Robust-line table covering [kRobustLineFloor, alpha2] (shared, cached).
inline std::shared_ptr<const RobustLineTable> robust_line_table_for(double alpha2, const FockSpace& space,
                                                                    double kerr = 1.0) {
  if (!(alpha2 > kRobustLineFloor))
    fail(ErrorKind::SchemeInfeasible, "cat size below the robust-line range");
  return cached_robust_line(kRobustLineFloor, alpha2, space, kerr);
}

/// Scheme 1<->2: ramp delta onto the robust line, trace it while the cat is
/// shrunk by a truncated-Gaussian dip, ramp back.
inline PulseSchedule scheme_z_robustline(double T, double tau, double eps2_ramp0, const KerrCatParams& params,
                                         std::shared_ptr<const RobustLineTable> robust_line_fn) {
  params.validate();
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "gate time must be positive");
  if (!(tau > 0.0 && tau < 0.5 * T)) fail(ErrorKind::InvalidInput, "ramp time must lie in (0, T/2)");
  if (eps2_ramp0 > 0.0) fail(ErrorKind::InvalidRamp, "two-photon modulation must be <= 0");
  if (!robust_line_fn) fail(ErrorKind::InvalidInput, "missing robust-line function");
  const double K = params.kerr;
  const double a2 = params.alpha2();
  const double a2_min = (params.eps2_0 + eps2_ramp0) / K;
  if (a2_min < robust_line_fn->lo() - 1e-12 || a2 > robust_line_fn->hi() + 1e-12)
    fail(ErrorKind::SchemeInfeasible, "cat-size ramp leaves the robust-line range");
  const double d_rob = (*robust_line_fn)(a2);
  const double mid = T - 2.0 * tau;

  auto delta_fn = [=](double t) {
    if (t <= tau) return d_rob * truncated_gaussian(2.0 * tau, t);
    if (t >= T - tau) return d_rob * truncated_gaussian(2.0 * tau, t - (T - 2.0 * tau));
    const double e2 = eps2_ramp0 * truncated_gaussian(mid, t - tau);
    return (*robust_line_fn)(a2 + e2 / K);
  };
  auto delta_rate = [=](double t) {
    if (t <= tau) return d_rob * truncated_gaussian_deriv(2.0 * tau, t);
    if (t >= T - tau) return d_rob * truncated_gaussian_deriv(2.0 * tau, t - (T - 2.0 * tau));
    const double e2 = eps2_ramp0 * truncated_gaussian(mid, t - tau);
    const double de2 = eps2_ramp0 * truncated_gaussian_deriv(mid, t - tau);
    return robust_line_fn->derivative(a2 + e2 / K) * de2 / K;
  };
  auto eps2_fn = [=](double t) {
    if (t <= tau || t >= T - tau) return 0.0;
    return eps2_ramp0 * truncated_gaussian(mid, t - tau);
  };
  auto eps2_rate = [=](double t) {
    if (t <= tau || t >= T - tau) return 0.0;
    return eps2_ramp0 * truncated_gaussian_deriv(mid, t - tau);
  };

  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::Z_ROBUSTLINE;
  s.channel(PulseChannel::Delta) = Envelope(T, EnvelopeKind::Composite, delta_fn, delta_rate);
  if (eps2_ramp0 != 0.0) s.channel(PulseChannel::Eps2Mod) = Envelope(T, EnvelopeKind::Composite, eps2_fn, eps2_rate);
  s.target = rot_z(-std::numbers::pi / 2);
  s.params = {{"tau", tau}, {"eps2_ramp0", eps2_ramp0}, {"delta_rob", d_rob}};
  return s;
}

inline PulseSchedule scheme_z_robustline(double T, double tau, double eps2_ramp0, const KerrCatParams& params,
                                         const FockSpace& space) {
  return scheme_z_robustline(T, tau, eps2_ramp0, params, robust_line_table_for(params.alpha2(), space, params.kerr));
}

/// Scheme 1<->2': straight line to (delta_max, alpha'^2) and back, both scaled by f(t).
inline PulseSchedule scheme_z_straight(double T, double delta_max, double eps2_ramp0, const KerrCatParams& params) {
  params.validate();
  if (!(T > 0.0)) fail(ErrorKind::InvalidInput, "gate time must be positive");
  if (!std::isfinite(delta_max)) fail(ErrorKind::InvalidInput, "non-finite detuning amplitude");
  if (eps2_ramp0 > 0.0) fail(ErrorKind::InvalidRamp, "two-photon modulation must be <= 0");
  if (params.eps2_0 + eps2_ramp0 < -1e-12 * params.kerr)
    fail(ErrorKind::InvalidRamp, "cat size would become negative during the ramp");
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::Z_STRAIGHT;
  s.channel(PulseChannel::Delta) = full_pulse(T, delta_max);
  if (eps2_ramp0 != 0.0) s.channel(PulseChannel::Eps2Mod) = full_pulse(T, eps2_ramp0);
  s.target = rot_z(-std::numbers::pi / 2);
  s.params = {{"delta_max", delta_max}, {"eps2_ramp0", eps2_ramp0}};
  return s;
}

/// Kerr gate: two-photon pump switched off for T = pi/K. The detuning is held
/// at -K/2 during the gate so that the free Kerr evolution acts as Z(pi/2) on
/// the cat pair instead of also rotating phase space by pi/2.
inline PulseSchedule scheme_kerr_gate(const KerrCatParams& params) {
  params.validate();
  const double T = std::numbers::pi / params.kerr;
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::KERR_GATE;
  s.channel(PulseChannel::Eps2Mod) = constant_envelope(T, -params.eps2_0);
  s.channel(PulseChannel::Delta) = constant_envelope(T, -0.5 * params.kerr);
  s.target = rot_z(std::numbers::pi / 2);
  s.params = {{"T", T}};
  return s;
}

/// Reference error model of the Kerr gate, alpha^2 Delta^2 T^2.
inline double kerr_gate_infidelity_model(double alpha2, double shift, double T) {
  return alpha2 * shift * shift * T * T;
}

// ---------------------------------------------------------------- adiabatic angle

struct Trajectory {
  std::vector<double> t;
  std::vector<double> delta;   // total detuning
  std::vector<double> alpha2;  // instantaneous cat size
  std::vector<double> gap;     // E01
  std::vector<double> deriv;   // dE01/ddelta
};

/// (delta(t), alpha^2(t)) and the gap along a parity-conserving schedule.
inline Trajectory trajectory(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                             int samples = 0) {
  const int n = samples > 0 ? samples : s.sample_count;
  Trajectory tr;
  tr.t = linspace(0.0, s.duration, n);
  tr.delta.resize(n);
  tr.alpha2.resize(n);
  tr.gap.resize(n);
  tr.deriv.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto c = s.controls(tr.t[i]);
    const double delta = params.delta + c.detuning;
    const double eps2 = params.eps2_0 + c.eps2;
    const auto g = gap_point_raw(delta, eps2, params.kerr, space.dim());
    tr.delta[i] = delta;
    tr.alpha2[i] = eps2 / params.kerr;
    tr.gap[i] = g.gap;
    tr.deriv[i] = g.deriv;
  }
  return tr;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return acc;
}

/// theta(Delta) ~ theta0 + Delta * slope with theta0 = -int E01 dt and
/// slope = -int dE01/ddelta dt.
struct AngleModel {
  double theta0 = 0.0;
  double slope = 0.0;
  double operator()(double shift) const { return theta0 + shift * slope; }
};

inline AngleModel angle_model(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                              int samples = 0) {
  if (s.single_photon()) fail(ErrorKind::InvalidInput, "adiabatic angle model needs a parity-conserving schedule");
  const auto tr = trajectory(s, params, space, samples);
  return {-trapezoid(tr.t, tr.gap), -trapezoid(tr.t, tr.deriv)};
}

inline double predicted_angle(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                              double shift, int samples = 0) {
  return angle_model(s, params, space, samples)(shift);
}

}  // namespace kerrcat
