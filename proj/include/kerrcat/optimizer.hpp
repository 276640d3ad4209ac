#pragma once

// Exhaustive coarse-to-fine lattice search over a few pulse parameters.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerrcat/fidelity.hpp"
#include "kerrcat/parallel.hpp"
#include "kerrcat/pulses.hpp"

namespace kerrcat {

struct ParamSpace {
  std::vector<std::string> names;
  std::vector<std::pair<double, double>> bounds;
  int coarse_n = 21;
  int refine_rounds = 2;
  double shrink = 5.0;

  int size() const { return static_cast<int>(names.size()); }

  void validate() const {
    if (names.empty() || names.size() != bounds.size()) fail(ErrorKind::InvalidInput, "parameter names and bounds differ");
    if (names.size() > 3) fail(ErrorKind::InvalidInput, "at most three free parameters");
    if (coarse_n < 5) fail(ErrorKind::InvalidInput, "need at least 5 points per axis");
    if (refine_rounds < 0) fail(ErrorKind::InvalidInput, "negative refinement count");
    for (const auto& [lo, hi] : bounds)
      if (!(lo < hi)) fail(ErrorKind::InvalidInput, "parameter bounds must satisfy lo < hi");
  }
};

struct TracePoint {
  std::vector<double> params;
  double value;
  bool failed = false;
};

struct OptimizationRecord {
  std::vector<std::string> names;
  std::vector<double> best;
  double best_avg_infidelity = 1.0;
  int evaluations = 0;
  std::vector<TracePoint> trace;
  bool feasible = true;

  std::map<std::string, double> best_params() const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < names.size() && i < best.size(); ++i) out[names[i]] = best[i];
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["best_params"] = best_params();
    j["best_avg_infidelity"] = best_avg_infidelity;
    j["evaluations"] = evaluations;
    j["feasible"] = feasible;
    auto& tr = j["trace"] = nlohmann::json::array();
    for (const auto& p : trace) tr.push_back({{"params", p.params}, {"avg_infidelity", p.value}, {"failed", p.failed}});
    return j;
  }
};

using Objective = std::function<double(std::span<const double>)>;

namespace detail {

inline std::vector<std::vector<double>> lattice(const std::vector<std::pair<double, double>>& box, int n) {
  const int dim = static_cast<int>(box.size());
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= n;
  std::vector<std::vector<double>> pts(total, std::vector<double>(dim));
  for (int k = 0; k < total; ++k) {
    int rem = k;
    // first parameter varies slowest: lexicographic order
    for (int i = dim - 1; i >= 0; --i) {
      const int idx = rem % n;
      rem /= n;
      const auto [lo, hi] = box[i];
      pts[k][i] = idx == n - 1 ? hi : lo + (hi - lo) * idx / (n - 1);
    }
  }
  return pts;
}

}  // namespace detail

namespace detail {

inline void evaluate_lattice(const Objective& objective, const std::vector<std::vector<double>>& pts, int threads,
                             OptimizationRecord& rec) {
  std::vector<double> values(pts.size());
  std::vector<char> failed(pts.size(), 0);
  parallel_for(static_cast<int>(pts.size()), threads, [&](int k) {
    try {
      values[k] = objective(pts[k]);
      if (!std::isfinite(values[k])) throw Error(ErrorKind::IllConditioned, "non-finite objective");
    } catch (const Error&) {
      values[k] = 1.0;
      failed[k] = 1;
    }
  });
  for (std::size_t k = 0; k < pts.size(); ++k) {
    rec.trace.push_back({pts[k], values[k], failed[k] != 0});
    if (values[k] < rec.best_avg_infidelity) {
      rec.best_avg_infidelity = values[k];
      rec.best = pts[k];
    }
  }
  rec.evaluations += static_cast<int>(pts.size());
}

inline std::vector<std::pair<double, double>> shrink_box(const std::vector<std::pair<double, double>>& box,
                                                         const std::vector<std::pair<double, double>>& bounds,
                                                         const std::vector<double>& centre, double shrink) {
  std::vector<std::pair<double, double>> out(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double half = 0.5 * (box[i].second - box[i].first) / shrink;
    out[i] = {std::max(bounds[i].first, centre[i] - half), std::min(bounds[i].second, centre[i] + half)};
  }
  return out;
}

}  // namespace detail

/// Minimizes the objective on the coarse lattice and then on boxes shrunk by
/// `shrink` around the incumbent (clipped to the bounds). Failed evaluations
/// score 1. Ties keep the earlier point.
inline OptimizationRecord grid_minimize(const Objective& objective, const ParamSpace& space, int threads = 1) {
  space.validate();
  OptimizationRecord rec;
  rec.names = space.names;
  rec.best_avg_infidelity = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> box = space.bounds;
  for (int round = 0; round <= space.refine_rounds; ++round) {
    if (round > 0) box = detail::shrink_box(box, space.bounds, rec.best, space.shrink);
    detail::evaluate_lattice(objective, detail::lattice(box, space.coarse_n), threads, rec);
  }
  return rec;
}

using SchemeBuilder = std::function<PulseSchedule(std::span<const double>)>;

/// Searches the scheme parameters minimizing the Simpson-averaged infidelity.
inline OptimizationRecord grid_optimize(const SchemeBuilder& builder, const ParamSpace& space,
                                        const OscillatorModel& model, double delta_max, int n_points = 11,
                                        const PropagationOptions& opt = {}, int threads = 1) {
  return grid_minimize(
      [&](std::span<const double> x) {
        return average_infidelity(model, builder(x), delta_max, n_points, opt).average;
      },
      space, threads);
}

// ---------------------------------------------------------------- scheme problems

/// A scheme's free parameters, the builder mapping them to a schedule and,
/// for Z schemes, the adiabatic angle model of the built schedule. The angle
/// model fixes one parameter by the target angle and decides feasibility.
struct SchemeProblem {
  ParamSpace space;
  SchemeBuilder builder;
  std::function<AngleModel(std::span<const double>)> angle;
  double target_angle = -std::numbers::pi / 2;

  double angle_residual(std::span<const double> x) const {
    return std::abs(angle(x).theta0) - std::abs(target_angle);
  }
};

/// X: one scale factor s around the analytic amplitude, eps_x0 = s * seed,
/// restricted to eps_x0 <= amp_max.
inline SchemeProblem x_problem(double T, const KerrCatParams& params, double amp_max = 10.0,
                               std::pair<double, double> scale = {0.5, 1.5}) {
  const double seed = x_seed(T, params.alpha2());
  SchemeProblem p;
  p.space.names = {"eps_x0_scale"};
  p.space.bounds = {scale};
  p.builder = [=](std::span<const double> x) {
    const double amp = x[0] * seed;
    if (amp < 0.0 || amp > amp_max * params.kerr) fail(ErrorKind::SchemeInfeasible, "drive amplitude out of bounds");
    auto s = scheme_x(T, amp, params);
    s.params["eps_x0_scale"] = x[0];
    return s;
  };
  return p;
}

/// Y with DRAG: (scale of eps_y0 around its seed, eps2 dip depth). Without a
/// two-photon drive only the scale is free.
inline SchemeProblem y_problem(double T, const KerrCatParams& params, DragMode mode, const FockSpace& space,
                               double amp_max = 10.0, std::pair<double, double> scale = {0.5, 1.5}) {
  SchemeProblem p;
  const bool dip = params.eps2_0 > 0.0;
  p.space.names = {"eps_y0_scale"};
  p.space.bounds = {scale};
  if (dip) {
    p.space.names.push_back("eps2_ramp0");
    p.space.bounds.push_back({-params.eps2_0, 0.0});
  }
  p.builder = [=](std::span<const double> x) {
    const double e2 = dip ? x[1] : 0.0;
    const double amp = x[0] * y_seed(T, e2, params);
    if (amp < 0.0 || amp > amp_max * params.kerr) fail(ErrorKind::SchemeInfeasible, "drive amplitude out of bounds");
    auto s = scheme_y_drag(T, amp, e2, params, mode, space);
    s.params["eps_y0_scale"] = x[0];
    return s;
  };
  return p;
}

inline constexpr int kAngleSamples = 200;

inline SchemeProblem z_robust_problem(double T, const KerrCatParams& params, const FockSpace& space) {
  SchemeProblem p;
  p.space.names = {"tau", "eps2_ramp0"};
  p.space.bounds = {{0.05 * T, 0.45 * T}, {-params.eps2_0, 0.0}};
  const auto table = robust_line_table_for(params.alpha2(), space, params.kerr);
  p.builder = [=](std::span<const double> x) { return scheme_z_robustline(T, x[0], x[1], params, table); };
  p.angle = [=](std::span<const double> x) {
    return angle_model(scheme_z_robustline(T, x[0], x[1], params, table), params, space, kAngleSamples);
  };
  return p;
}

inline SchemeProblem z_straight_problem(double T, const KerrCatParams& params, const FockSpace& space) {
  SchemeProblem p;
  p.space.names = {"delta_max", "eps2_ramp0"};
  p.space.bounds = {{0.0, params.kerr}, {-params.eps2_0, 0.0}};
  p.builder = [=](std::span<const double> x) { return scheme_z_straight(T, x[0], x[1], params); };
  p.angle = [=](std::span<const double> x) {
    return angle_model(scheme_z_straight(T, x[0], x[1], params), params, space, kAngleSamples);
  };
  return p;
}

/// True when the residual changes sign (or vanishes) somewhere on the coarse
/// lattice, i.e. some parameters reach a pi/2 rotation. Infeasible builds are
/// skipped.
inline bool angle_reachable(const SchemeProblem& p, int threads = 1) {
  if (!p.angle) return true;
  const auto pts = detail::lattice(p.space.bounds, p.space.coarse_n);
  std::vector<double> r(pts.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<int>(pts.size()), threads, [&](int k) {
    try {
      r[k] = p.angle_residual(pts[k]);
    } catch (const Error&) {
    }
  });
  bool below = false, above = false;
  for (double v : r) {
    if (std::isnan(v)) continue;
    below |= v <= 0.0;
    above |= v >= 0.0;
  }
  return below && above;
}

namespace detail {

/// All e in [lo, hi] with f(e) = 0: sign changes on an n-point scan refined
/// by bisection. Failed evaluations break the scan.
inline std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi, int n,
                                      double tol) {
  std::vector<double> xs(n), fs(n, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i) {
    xs[i] = i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
    try {
      fs[i] = f(xs[i]);
    } catch (const Error&) {
    }
  }
  std::vector<double> roots;
  for (int i = 0; i + 1 < n; ++i) {
    if (std::isnan(fs[i]) || std::isnan(fs[i + 1])) continue;
    if (fs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if ((fs[i] > 0.0) == (fs[i + 1] > 0.0) || fs[i + 1] == 0.0) continue;
    double a = xs[i], b = xs[i + 1], fa = fs[i];
    while (b - a > tol) {
      const double m = 0.5 * (a + b), fm = f(m);
      if (fm == 0.0) a = b = m;
      else if ((fm > 0.0) == (fa > 0.0)) a = m, fa = fm;
      else b = m;
    }
    roots.push_back(0.5 * (a + b));
  }
  if (n > 0 && fs[n - 1] == 0.0) roots.push_back(xs[n - 1]);
  return roots;
}

}  // namespace detail

inline constexpr int kRootScan = 21;

/// Z schemes have two parameters and the rotation angle fixes one of them:
/// for each lattice value of the first parameter every second parameter
/// giving theta_0 = target (adiabatic model) is found, and the candidates are
/// ranked by the propagated average infidelity. The first parameter is then
/// refined like grid_minimize, following the root branch nearest the
/// incumbent. When no parameters reach the angle the record is infeasible
/// with an empty `best`. Without an angle model this is grid_optimize.
inline OptimizationRecord optimize_scheme(const SchemeProblem& p, const OscillatorModel& model, double delta_max,
                                          int n_points = 11, const PropagationOptions& opt = {}, int threads = 1) {
  if (!p.angle) {
    auto rec = grid_optimize(p.builder, p.space, model, delta_max, n_points, opt, threads);
    rec.feasible = true;
    return rec;
  }
  p.space.validate();
  if (p.space.size() != 2) fail(ErrorKind::InvalidInput, "angle-constrained search needs two parameters");
  const auto [elo, ehi] = p.space.bounds[1];
  const double etol = 1e-9 * std::max(1.0, ehi - elo);
  auto residual_at = [&](double x0) {
    return [&p, x0](double e) {
      const double x[2] = {x0, e};
      return p.angle_residual(x);
    };
  };
  auto objective = [&](std::span<const double> x) {
    return average_infidelity(model, p.builder(x), delta_max, n_points, opt).average;
  };

  OptimizationRecord rec;
  rec.names = p.space.names;
  rec.best_avg_infidelity = std::numeric_limits<double>::infinity();
  rec.feasible = false;
  std::pair<double, double> box = p.space.bounds[0];
  for (int round = 0; round <= p.space.refine_rounds; ++round) {
    if (round > 0) {
      if (!rec.feasible) break;
      const double half = 0.5 * (box.second - box.first) / p.space.shrink;
      box = {std::max(p.space.bounds[0].first, rec.best[0] - half),
             std::min(p.space.bounds[0].second, rec.best[0] + half)};
    }
    const int n = p.space.coarse_n;
    std::vector<std::vector<double>> roots(n);
    parallel_for(n, threads, [&](int k) {
      const double x0 = k == n - 1 ? box.second : box.first + (box.second - box.first) * k / (n - 1);
      for (double e : detail::scan_roots(residual_at(x0), elo, ehi, kRootScan, etol)) roots[k].push_back(e);
      if (round > 0 && roots[k].size() > 1) {
        // stay on the incumbent's branch
        const double e0 = rec.best[1];
        const auto it = std::min_element(roots[k].begin(), roots[k].end(),
                                         [&](double a, double b) { return std::abs(a - e0) < std::abs(b - e0); });
        roots[k] = {*it};
      }
    });
    std::vector<std::vector<double>> pts;
    for (int k = 0; k < n; ++k) {
      const double x0 = k == n - 1 ? box.second : box.first + (box.second - box.first) * k / (n - 1);
      for (double e : roots[k]) pts.push_back({x0, e});
    }
    if (!pts.empty()) rec.feasible = true;
    detail::evaluate_lattice(objective, pts, threads, rec);
  }
  if (!rec.feasible) {
    rec.best.clear();
    rec.best_avg_infidelity = 1.0;
  }
  return rec;
}

}  // namespace kerrcat
