#pragma once

// Projected gate infidelity and its detuning average.

#include <cmath>
#include <ostream>
#include <vector>

#include "kerrcat/parallel.hpp"
#include "kerrcat/propagator.hpp"

namespace kerrcat {

/// 1 - |Tr(V^dag M)|^2 / n^2 for the n x n block M = P U P of the gate.
inline double infidelity(const Matrix& projected, const Matrix& target) {
  if (projected.rows() != target.rows() || projected.cols() != target.cols() || target.rows() != target.cols())
    fail(ErrorKind::InvalidInput, "projected gate and target differ in shape");
  const double n = static_cast<double>(target.rows());
  const double tr = std::abs((target.adjoint() * projected).trace());
  return 1.0 - tr * tr / (n * n);
}

/// Full-space form: U is dim x dim, comp holds the computational states as columns.
inline double infidelity(const Matrix& unitary, const Matrix& target, const Matrix& comp) {
  return infidelity(Matrix(comp.adjoint() * unitary * comp), target);
}

/// Composite Simpson weights on n (odd) equispaced nodes, normalized to sum to 1.
inline std::vector<double> simpson_weights(int n) {
  if (n < 3 || n % 2 == 0) fail(ErrorKind::InvalidInput, "Simpson rule needs an odd node count >= 3");
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  const double total = 3.0 * (n - 1);
  for (auto& x : w) x /= total;
  return w;
}

struct InfidelityGrid {
  double T = 0.0;
  std::vector<double> deltas;
  std::vector<double> infidelities;
  double average = 0.0;

  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "T,Delta,infidelity\n";
    for (std::size_t i = 0; i < deltas.size(); ++i) os << T << ',' << deltas[i] << ',' << infidelities[i] << '\n';
    os << T << ",average," << average << '\n';
  }
};

/// Gate infidelity at a single static detuning error.
inline double gate_infidelity(const OscillatorModel& model, const PulseSchedule& s, DetuningError err,
                              const PropagationOptions& opt = {}) {
  PropagationOptions o = opt;
  o.track_leakage = false;
  const auto r = propagate_states(model, s, err, model.computational(), o);
  if (!(r.unitarity_defect < 1e-8)) fail(ErrorKind::Truncation, "propagation lost unitarity");
  return infidelity(Matrix(model.computational().adjoint() * r.unitary), s.target);
}

/// Infidelity on n_points equispaced detunings in [-delta_max, delta_max] and
/// their Simpson average, which approximates (1/2 dmax) int I(Delta) dDelta.
inline InfidelityGrid average_infidelity(const OscillatorModel& model, const PulseSchedule& s, double delta_max,
                                         int n_points = 11, const PropagationOptions& opt = {},
                                         int threads = 1) {
  if (!(delta_max > 0.0)) fail(ErrorKind::InvalidInput, "Delta_max must be positive");
  const auto w = simpson_weights(n_points);
  InfidelityGrid g;
  g.T = s.duration;
  g.deltas = linspace(-delta_max, delta_max, n_points);
  g.infidelities.assign(n_points, 0.0);
  parallel_for(n_points, threads, [&](int i) { g.infidelities[i] = gate_infidelity(model, s, g.deltas[i], opt); });
  for (int i = 0; i < n_points; ++i) g.average += w[i] * g.infidelities[i];
  return g;
}

inline InfidelityGrid average_infidelity(const PulseSchedule& s, const KerrCatParams& params, double delta_max,
                                         int n_points = 11, const FockSpace& space = FockSpace(kDefaultFockDim),
                                         const PropagationOptions& opt = {}) {
  const OscillatorModel model(params, space);
  return average_infidelity(model, s, delta_max, n_points, opt);
}

}  // namespace kerrcat
