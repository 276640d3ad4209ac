#pragma once

// Frequency-noise realizations, the adiabatic angle-error functional and
// filter weighting W(w) = |int e^{iwt} dE01/ddelta(t) dt|^2 / 4.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "kerrcat/fidelity.hpp"
#include "kerrcat/parallel.hpp"
#include "kerrcat/propagator.hpp"
#include "kerrcat/pulses.hpp"

namespace kerrcat {

enum class NoiseKind { Static, Quasistatic, OrnsteinUhlenbeck, TabulatedPsd };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Static: return "static";
    case NoiseKind::Quasistatic: return "quasistatic";
    case NoiseKind::OrnsteinUhlenbeck: return "ornstein-uhlenbeck";
    case NoiseKind::TabulatedPsd: return "tabulated-psd";
  }
  return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "static") return NoiseKind::Static;
  if (s == "quasistatic" || s == "gaussian-quasistatic") return NoiseKind::Quasistatic;
  if (s == "ou" || s == "ornstein-uhlenbeck") return NoiseKind::OrnsteinUhlenbeck;
  if (s == "tabulated-psd" || s == "psd") return NoiseKind::TabulatedPsd;
  fail(ErrorKind::InvalidModel, "unknown noise kind '" + s + "'");
}

/// Stationary Gaussian detuning noise.
///   static:       "value"            Delta(t) = value
///   quasistatic:  "sigma"            Delta(t) = const ~ N(0, sigma^2)
///   OU:           "sigma", "tau_c"   <Delta(t)Delta(0)> = sigma^2 e^{-|t|/tau_c}
///   tabulated:    psd_omega, psd_values (two-sided S(w), w >= 0)
/// S(w) = int <Delta(t)Delta(0)> e^{iwt} dt.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Static;
  std::map<std::string, double> parameters;
  std::uint64_t seed = 0;
  std::vector<double> psd_omega;
  std::vector<double> psd_values;

  double param(const std::string& name) const {
    const auto it = parameters.find(name);
    if (it == parameters.end()) fail(ErrorKind::InvalidModel, "noise model lacks parameter '" + name + "'");
    return it->second;
  }

  void validate() const {
    switch (kind) {
      case NoiseKind::Static:
        if (!std::isfinite(param("value"))) fail(ErrorKind::InvalidModel, "non-finite static shift");
        break;
      case NoiseKind::Quasistatic:
        if (!(param("sigma") >= 0.0)) fail(ErrorKind::InvalidModel, "sigma must be >= 0");
        break;
      case NoiseKind::OrnsteinUhlenbeck:
        if (!(param("sigma") >= 0.0)) fail(ErrorKind::InvalidModel, "sigma must be >= 0");
        if (!(param("tau_c") > 0.0)) fail(ErrorKind::InvalidModel, "correlation time must be positive");
        break;
      case NoiseKind::TabulatedPsd:
        if (psd_omega.size() < 2 || psd_omega.size() != psd_values.size())
          fail(ErrorKind::InvalidModel, "tabulated PSD needs >= 2 matching points");
        for (std::size_t i = 0; i < psd_omega.size(); ++i) {
          if (psd_values[i] < 0.0 || !std::isfinite(psd_values[i]))
            fail(ErrorKind::InvalidModel, "PSD must be non-negative");
          if (i > 0 && !(psd_omega[i] > psd_omega[i - 1]))
            fail(ErrorKind::InvalidModel, "PSD frequencies must increase");
        }
        if (psd_omega.front() < 0.0) fail(ErrorKind::InvalidModel, "PSD frequencies must be >= 0");
        break;
    }
  }

  /// Continuous part of S(w); static and quasistatic noise are pure delta peaks.
  double psd(double omega) const {
    omega = std::abs(omega);
    switch (kind) {
      case NoiseKind::Static:
      case NoiseKind::Quasistatic: return 0.0;
      case NoiseKind::OrnsteinUhlenbeck: {
        const double s = param("sigma"), tc = param("tau_c");
        return 2.0 * s * s * tc / (1.0 + omega * omega * tc * tc);
      }
      case NoiseKind::TabulatedPsd: {
        if (omega <= psd_omega.front()) return psd_values.front();
        if (omega >= psd_omega.back()) return 0.0;
        const auto it = std::upper_bound(psd_omega.begin(), psd_omega.end(), omega);
        const std::size_t j = static_cast<std::size_t>(it - psd_omega.begin()) - 1;
        const double w = (omega - psd_omega[j]) / (psd_omega[j + 1] - psd_omega[j]);
        return (1.0 - w) * psd_values[j] + w * psd_values[j + 1];
      }
    }
    return 0.0;
  }

  /// Weight of the delta peak at w = 0: S(w) = 2 pi peak delta(w) + continuous part.
  double zero_frequency_weight() const {
    if (kind == NoiseKind::Static) return param("value") * param("value");
    if (kind == NoiseKind::Quasistatic) return param("sigma") * param("sigma");
    return 0.0;
  }
};

inline std::mt19937_64 noise_rng(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// One realization of the noise on [0, T] with step dt; `realization`
/// selects an independent stream derived from the model seed.
inline DetuningTrace sample_noise(const NoiseModel& noise, double T, double dt, std::uint64_t realization = 0) {
  noise.validate();
  if (!(T > 0.0) || !(dt > 0.0)) fail(ErrorKind::InvalidInput, "noise trace needs T > 0 and dt > 0");
  const int n = static_cast<int>(std::ceil(T / dt - 1e-9)) + 1;
  DetuningTrace tr;
  tr.times = linspace(0.0, T, n);
  tr.values.assign(n, 0.0);
  auto rng = noise_rng(noise.seed, realization);
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (noise.kind) {
    case NoiseKind::Static:
      std::fill(tr.values.begin(), tr.values.end(), noise.param("value"));
      break;
    case NoiseKind::Quasistatic: {
      const double x = noise.param("sigma") * normal(rng);
      std::fill(tr.values.begin(), tr.values.end(), x);
      break;
    }
    case NoiseKind::OrnsteinUhlenbeck: {
      const double sigma = noise.param("sigma"), tc = noise.param("tau_c");
      const double h = T / (n - 1);
      const double rho = std::exp(-h / tc);
      const double kick = sigma * std::sqrt(1.0 - rho * rho);
      double x = sigma * normal(rng);
      tr.values[0] = x;
      for (int i = 1; i < n; ++i) {
        x = rho * x + kick * normal(rng);
        tr.values[i] = x;
      }
      break;
    }
    case NoiseKind::TabulatedPsd: {
      // sum of random-phase cosines, Var = sum S(w_j) dw_j / pi = int S dw / 2pi over both signs
      const auto& w = noise.psd_omega;
      const auto& s = noise.psd_values;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double lo = j == 0 ? w[0] : 0.5 * (w[j - 1] + w[j]);
        const double hi = j + 1 == w.size() ? w[j] : 0.5 * (w[j] + w[j + 1]);
        const double var = s[j] * (hi - lo) / std::numbers::pi;
        const double a = std::sqrt(var) * normal(rng), b = std::sqrt(var) * normal(rng);
        for (int i = 0; i < n; ++i) {
          const double ph = w[j] * tr.times[i];
          tr.values[i] += a * std::cos(ph) + b * std::sin(ph);
        }
      }
      break;
    }
  }
  return tr;
}

/// theta_err = -int Delta(t) dE01/ddelta(t) dt on the schedule grid.
inline double angle_error_functional(const Trajectory& tr, const DetuningTrace& delta) {
  std::vector<double> y(tr.t.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = delta(tr.t[i]) * tr.deriv[i];
  return -trapezoid(tr.t, y);
}

inline double angle_error_functional(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                                     const DetuningTrace& delta) {
  return angle_error_functional(trajectory(s, params, space), delta);
}

struct FilterFunction {
  std::vector<double> omegas;
  std::vector<double> W;

  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "omega,value\n";
    for (std::size_t i = 0; i < omegas.size(); ++i) os << omegas[i] << ',' << W[i] << '\n';
  }
};

/// 0 plus `n` log-spaced frequencies over [lo/T, hi/T].
inline std::vector<double> default_omega_grid(double T, int n = 512, double lo = 1e-3, double hi = 1e3) {
  std::vector<double> out{0.0};
  for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, std::log10(lo) + (std::log10(hi / lo)) * i / (n - 1)) / T);
  return out;
}

/// int e^{iwt} y(t) dt with y linear between samples (exact for that interpolant).
inline std::complex<double> fourier_piecewise_linear(const std::vector<double>& t, const std::vector<double>& y,
                                                     double omega) {
  using C = std::complex<double>;
  C acc{0.0, 0.0};
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    const double s = (y[k + 1] - y[k]) / h;
    const double th = omega * h;
    C e1, e2;  // int_0^h e^{iwu} du, int_0^h u e^{iwu} du
    if (std::abs(th) < 1e-3) {
      const double t2 = th * th;
      e1 = h * C(1.0 - t2 / 6.0 + t2 * t2 / 120.0, th / 2.0 - th * t2 / 24.0);
      e2 = h * h * C(0.5 - t2 / 8.0 + t2 * t2 / 144.0, th / 3.0 - th * t2 / 30.0);
    } else {
      const C eih = std::exp(C(0.0, th));
      const C iw(0.0, omega);
      e1 = (eih - 1.0) / iw;
      e2 = h * eih / iw - (eih - 1.0) / (iw * iw);
    }
    acc += std::exp(C(0.0, omega * t[k])) * (y[k] * e1 + s * e2);
  }
  return acc;
}

inline FilterFunction filter_weight(const Trajectory& tr, const std::vector<double>& omegas) {
  FilterFunction f;
  f.omegas = omegas;
  f.W.resize(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) f.W[i] = 0.25 * std::norm(fourier_piecewise_linear(tr.t, tr.deriv, omegas[i]));
  return f;
}

inline FilterFunction filter_weight(const PulseSchedule& s, const KerrCatParams& params, const FockSpace& space,
                                    const std::vector<double>& omegas) {
  if (s.single_photon()) fail(ErrorKind::InvalidInput, "filter weighting needs a parity-conserving schedule");
  return filter_weight(trajectory(s, params, space), omegas);
}

struct SpectralEstimate {
  double value = 0.0;
  double tail_fraction = 0.0;  // estimated mass beyond the grid / total
  bool coverage_warning = false;
};

/// Ibar = int dw/2pi S(w) W(w) = 2 int_0^inf dw/2pi S W, plus peak * W(0) for
/// the delta part of static / quasistatic noise.
inline SpectralEstimate spectral_average_infidelity(const FilterFunction& f, const NoiseModel& noise) {
  noise.validate();
  SpectralEstimate est;
  const std::size_t n = f.omegas.size();
  if (n == 0) fail(ErrorKind::InvalidInput, "empty frequency grid");
  double w0 = 0.0;
  bool have_zero = false;
  for (std::size_t i = 0; i < n; ++i)
    if (f.omegas[i] == 0.0) {
      w0 = f.W[i];
      have_zero = true;
    }
  const double peak = noise.zero_frequency_weight();
  if (peak > 0.0 && !have_zero) fail(ErrorKind::InvalidInput, "static noise needs w = 0 on the grid");
  double cont = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = noise.psd(f.omegas[i]) * f.W[i], b = noise.psd(f.omegas[i + 1]) * f.W[i + 1];
    cont += 0.5 * (f.omegas[i + 1] - f.omegas[i]) * (a + b);
  }
  cont *= 2.0 / (2.0 * std::numbers::pi);
  // integrand decays at least like w^-2 past the grid: tail ~ w_max * integrand(w_max)
  const double wmax = f.omegas.back();
  const double tail = 2.0 / (2.0 * std::numbers::pi) * wmax * noise.psd(wmax) * f.W.back();
  est.value = cont + peak * w0;
  const double total = est.value + tail;
  est.tail_fraction = total > 0.0 ? tail / total : 0.0;
  est.coverage_warning = est.tail_fraction > 0.01;
  return est;
}

/// Curvature of the static infidelity, [I(h) + I(-h) - 2 I(0)] / (2 h^2).
inline double static_taylor_coefficient(const OscillatorModel& model, const PulseSchedule& s, double h,
                                        const PropagationOptions& opt = {}) {
  const double ip = gate_infidelity(model, s, h, opt), im = gate_infidelity(model, s, -h, opt),
               i0 = gate_infidelity(model, s, 0.0, opt);
  return (ip + im - 2.0 * i0) / (2.0 * h * h);
}

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;
  double baseline = 0.0;  // noiseless infidelity of the same schedule
  std::vector<double> samples;
};

/// Full-propagation average infidelity over noise realizations.
inline MonteCarloResult monte_carlo_infidelity(const OscillatorModel& model, const PulseSchedule& s,
                                               const NoiseModel& noise, int realizations, double noise_dt,
                                               const PropagationOptions& opt = {}, int threads = 1) {
  if (realizations < 1) fail(ErrorKind::InvalidInput, "need at least one realization");
  MonteCarloResult r;
  r.samples.assign(realizations, 0.0);
  parallel_for(realizations, threads, [&](int k) {
    const auto trace = sample_noise(noise, s.duration, noise_dt, static_cast<std::uint64_t>(k));
    r.samples[k] = gate_infidelity(model, s, DetuningError(trace), opt);
  });
  double sum = 0.0, sq = 0.0;
  for (double x : r.samples) sum += x;
  r.mean = sum / realizations;
  for (double x : r.samples) sq += (x - r.mean) * (x - r.mean);
  r.std_error = realizations > 1 ? std::sqrt(sq / (realizations - 1) / realizations) : 0.0;
  r.baseline = gate_infidelity(model, s, 0.0, opt);
  return r;
}

}  // namespace kerrcat
