#pragma once

// Time-ordered propagation of a pulse schedule.
//
// Steps use the fourth-order commutator-free Magnus exponential
//   U(t+h, t) = exp(-i h (a1 H(t1) + a2 H(t2))) exp(-i h (a2 H(t1) + a1 H(t2)))
// with Gauss nodes t1,2 = t + (1/2 -+ sqrt(3)/6) h, or the second-order
// midpoint rule. Each exponential is applied by a Chebyshev expansion on the
// sparse Hamiltonian, so only the propagated columns are ever formed.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "kerrcat/fock.hpp"
#include "kerrcat/pulses.hpp"
#include "kerrcat/sparse.hpp"
#include "kerrcat/spectral.hpp"

namespace kerrcat {

enum class Integrator { Midpoint, CF4 };

/// Piecewise-linear detuning record Delta(t); zero-order hold outside its range.
struct DetuningTrace {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(double t) const {
    if (times.empty()) return 0.0;
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[j]) / (times[j + 1] - times[j]);
    return (1.0 - w) * values[j] + w * values[j + 1];
  }
};

/// Static shift or a time series added to the detuning channel.
struct DetuningError {
  double shift = 0.0;
  const DetuningTrace* trace = nullptr;

  DetuningError() = default;
  DetuningError(double s) : shift(s) {}  // NOLINT: implicit by design
  DetuningError(const DetuningTrace& tr) : trace(&tr) {}  // NOLINT

  double operator()(double t) const { return trace ? shift + (*trace)(t) : shift; }
};

using CoefficientFn = std::function<void(double t, std::span<double> out)>;

/// Observer called after every full step with (t, current columns).
using StepObserver = std::function<void(double t, const Matrix& psi)>;

/// Evolves the columns of psi from 0 to T (or back from T to 0 when
/// `backward` is set, applying U^dagger) under drift + sum_k c_k(t) H_k.
inline void evolve_columns(const SparseOperatorSum& ops, const CoefficientFn& coeffs, double T, int steps,
                           Matrix& psi, Integrator integrator = Integrator::CF4, bool backward = false,
                           const StepObserver& observer = {}) {
  if (!(T > 0.0) || steps < 1) fail(ErrorKind::InvalidInput, "propagation needs T > 0 and at least one step");
  const int nc = ops.num_couplings();
  std::vector<double> c1(nc), c2(nc), mix(nc);
  SparseHermitian h = ops.make();
  ChebyshevPropagator cheb;
  const double dt = T / steps;
  const double sign = backward ? -1.0 : 1.0;

  auto check = [](std::span<const double> c) {
    for (double x : c)
      if (!std::isfinite(x)) fail(ErrorKind::InvalidInput, "non-finite control value during propagation");
  };

  for (int s = 0; s < steps; ++s) {
    // forward: step s covers [s dt, (s+1) dt]; backward walks the same steps in reverse
    const int k = backward ? steps - 1 - s : s;
    const double t0 = k * dt;
    if (integrator == Integrator::Midpoint) {
      coeffs(t0 + 0.5 * dt, c1);
      check(c1);
      ops.assemble(c1, h, 1.0);
      cheb.apply(h, sign * dt, psi);
    } else {
      constexpr double r3 = 1.7320508075688772;
      constexpr double a1 = (3.0 - 2.0 * r3) / 12.0;
      constexpr double a2 = (3.0 + 2.0 * r3) / 12.0;
      coeffs(t0 + (0.5 - r3 / 6.0) * dt, c1);
      coeffs(t0 + (0.5 + r3 / 6.0) * dt, c2);
      check(c1);
      check(c2);
      // forward order: first exp(a2 H1 + a1 H2), then exp(a1 H1 + a2 H2)
      auto stage = [&](double w1, double w2) {
        for (int i = 0; i < nc; ++i) mix[i] = w1 * c1[i] + w2 * c2[i];
        ops.assemble(mix, h, 0.5);
        cheb.apply(h, sign * dt, psi);
      };
      if (!backward) {
        stage(a2, a1);
        stage(a1, a2);
      } else {
        stage(a1, a2);
        stage(a2, a1);
      }
    }
    if (observer) observer(backward ? t0 : t0 + dt, psi);
  }
}

/// Operators and idle computational pair of one oscillator.
class OscillatorModel {
 public:
  OscillatorModel(const KerrCatParams& params, const FockSpace& space)
      : params_(params), space_(space), assembly_(params, space), ops_(assembly_.drift(), channel_list(assembly_)) {
    const auto spec = diagonalize_labeled(assembly_.drift(), parity_operator(space).matrix);
    comp_.resize(space.dim(), 2);
    comp_.col(0) = spec.states.col(spec.comp0);
    comp_.col(1) = spec.states.col(spec.comp1);
  }

  OscillatorModel(const OscillatorModel&) = delete;
  OscillatorModel& operator=(const OscillatorModel&) = delete;

  const KerrCatParams& params() const noexcept { return params_; }
  const FockSpace& space() const noexcept { return space_; }
  const HamiltonianAssembly& assembly() const noexcept { return assembly_; }
  const SparseOperatorSum& operators() const noexcept { return ops_; }
  /// Columns |C0>, |C1>: top even and top odd eigenstates of the idle drift.
  const Matrix& computational() const noexcept { return comp_; }

  CoefficientFn coefficients(const PulseSchedule& s, DetuningError err) const {
    return [&s, err](double t, std::span<double> out) {
      const auto c = s.controls(t);
      out[0] = c.detuning + err(t);
      out[1] = c.eps2;
      out[2] = c.eps_x;
      out[3] = c.eps_y;
    };
  }

 private:
  static std::vector<Matrix> channel_list(const HamiltonianAssembly& a) {
    return {a.channel(Channel::Detuning), a.channel(Channel::Eps2), a.channel(Channel::EpsX),
            a.channel(Channel::EpsY)};
  }

  KerrCatParams params_;
  FockSpace space_;
  HamiltonianAssembly assembly_;
  SparseOperatorSum ops_;
  Matrix comp_;
};

struct PropagationOptions {
  double dt = 0.0;             // 0: duration / default_steps
  int default_steps = 400;
  Integrator integrator = Integrator::CF4;
  bool adaptive = true;        // halve dt until U moves by less than tol
  double tol = 1e-10;
  double min_dt = 1e-6;        // in units of 1/K
  bool track_leakage = true;
};

struct PropagationResult {
  Matrix unitary;
  double unitarity_defect = 0.0;
  int step_count = 0;
  double dt = 0.0;
  double max_leakage_flux = 0.0;  // max over steps of the population leaving the idle pair
};

namespace detail {

inline double column_defect(const Matrix& psi, const Matrix& initial) {
  return (psi.adjoint() * psi - initial.adjoint() * initial).norm();
}

inline int steps_for(double T, const PropagationOptions& opt) {
  const double dt = opt.dt > 0.0 ? opt.dt : T / opt.default_steps;
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

inline Matrix run_columns(const OscillatorModel& model, const PulseSchedule& s, DetuningError err, int steps,
                          Matrix psi, const PropagationOptions& opt, double* leakage) {
  StepObserver obs;
  double leak = 0.0;
  if (leakage && opt.track_leakage) {
    const Matrix& comp = model.computational();
    obs = [&](double, const Matrix& cols) {
      const Matrix proj = comp.adjoint() * cols;
      for (int c = 0; c < cols.cols(); ++c) {
        const double inside = proj.col(c).squaredNorm();
        leak = std::max(leak, cols.col(c).squaredNorm() - inside);
      }
    };
  }
  evolve_columns(model.operators(), model.coefficients(s, err), s.duration, steps, psi, opt.integrator, false, obs);
  if (leakage) *leakage = leak;
  return psi;
}

}  // namespace detail

/// Propagates selected initial columns at a fixed step count; returns the
/// evolved columns. Leakage is tracked for these columns.
inline PropagationResult propagate_states(const OscillatorModel& model, const PulseSchedule& s, DetuningError err,
                                          const Matrix& initial, const PropagationOptions& opt = {}) {
  if (initial.rows() != model.space().dim()) fail(ErrorKind::InvalidInput, "initial state dimension mismatch");
  PropagationResult r;
  r.step_count = detail::steps_for(s.duration, opt);
  r.dt = s.duration / r.step_count;
  r.unitary = detail::run_columns(model, s, err, r.step_count, initial, opt, &r.max_leakage_flux);
  r.unitarity_defect = detail::column_defect(r.unitary, initial);
  return r;
}

/// Full propagator U(T, Delta) with adaptive step halving.
inline PropagationResult propagate(const OscillatorModel& model, const PulseSchedule& s, DetuningError err,
                                   const PropagationOptions& opt = {}) {
  const int d = model.space().dim();
  const Matrix eye = Matrix::Identity(d, d);
  PropagationResult r;
  int steps = detail::steps_for(s.duration, opt);
  Matrix u = detail::run_columns(model, s, err, steps, eye, opt, nullptr);
  if (opt.adaptive) {
    for (;;) {
      const int finer = steps * 2;
      if (s.duration / finer < opt.min_dt)
        fail(ErrorKind::Stiffness, "step refinement did not converge above the minimum step");
      Matrix v = detail::run_columns(model, s, err, finer, eye, opt, nullptr);
      const double change = (v - u).norm();
      u = std::move(v);
      steps = finer;
      if (change < opt.tol) break;
    }
  }
  r.unitary = std::move(u);
  r.step_count = steps;
  r.dt = s.duration / steps;
  r.unitarity_defect = (r.unitary.adjoint() * r.unitary - eye).norm();
  if (opt.track_leakage) {
    // re-run the pair columns at the accepted step to record the leakage history
    detail::run_columns(model, s, err, steps, model.computational(), opt, &r.max_leakage_flux);
  }
  return r;
}

inline PropagationResult propagate(const PulseSchedule& s, const KerrCatParams& params, DetuningError err,
                                   const FockSpace& space, const PropagationOptions& opt = {}) {
  const OscillatorModel model(params, space);
  return propagate(model, s, err, opt);
}

/// max_t |<e|dH/dt|c>| / (E_c - E_e)^2 over the computational states c and
/// the four levels right below them, i.e. |<e|d_t c>| / |E_c - E_e|.
inline double adiabaticity_diagnostic(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                                      int samples = 401) {
  const HamiltonianAssembly assembly(params, space);
  const Matrix parity = parity_operator(space).matrix;
  const bool parity_ok = !s.single_photon();
  const int d = space.dim();
  double worst = 0.0;
  for (double t : linspace(0.0, s.duration, samples)) {
    const auto rate = s.control_rates(t);
    Matrix hdot = Matrix::Zero(d, d);
    for (int c = 0; c < kNumChannels; ++c) {
      const double x = rate[static_cast<Channel>(c)];
      if (x != 0.0) hdot += x * assembly.channel(static_cast<Channel>(c));
    }
    if (hdot.norm() == 0.0) continue;
    const Matrix h = assembly.assemble(s.controls(t));
    std::vector<int> comp, exc;
    RealVector e;
    Matrix v;
    if (parity_ok) {
      const auto spec = diagonalize_labeled(h, parity);
      e = spec.energies;
      v = spec.states;
      comp = {spec.labeled(0), spec.labeled(1)};
      for (int label = 2; label < 6 && label < d; ++label) exc.push_back(spec.labeled(label));
    } else {
      const auto eig = detail::hermitian_eigen(h);
      e = eig.values;
      v = eig.vectors;
      comp = {d - 1, d - 2};
      for (int k = 3; k <= 6 && k <= d; ++k) exc.push_back(d - k);
    }
    for (int c : comp) {
      const Vector hc = hdot * v.col(c);
      for (int x : exc) {
        if (x < 0) continue;
        const double gap = e(c) - e(x);
        const double num = std::abs(v.col(x).dot(hc));
        if (gap == 0.0) {
          if (num > 0.0) return std::numeric_limits<double>::infinity();
          continue;
        }
        worst = std::max(worst, num / (gap * gap));
      }
    }
  }
  return worst;
}

}  // namespace kerrcat
