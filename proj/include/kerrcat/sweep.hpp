#pragma once

// Config-driven campaigns behind the command-line tool. Every output row
// carries the code version and a hash of the effective configuration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerrcat/noise.hpp"
#include "kerrcat/optimizer.hpp"
#include "kerrcat/twoqubit.hpp"

#ifndef KERRCAT_VERSION
#define KERRCAT_VERSION "0.1.0"
#endif

namespace kerrcat::cli {

using json = nlohmann::json;

inline constexpr const char* kCodeVersion = KERRCAT_VERSION;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimizerSettings {
  int coarse_n = 21;
  int refine_rounds = 2;
  std::pair<double, double> scale{0.5, 1.5};
  double amp_max = 10.0;
};

struct SweepConfig {
  std::string scheme = "X";
  std::vector<double> alpha2_list{2.0};
  std::vector<double> T_list{30.0};
  double delta_max = 5e-3;
  int delta_points = 11;
  int fock_dim = kDefaultFockDim;
  std::uint64_t seed = 0;
  double kerr = 1.0;
  std::string drag = "exact";
  int steps = 400;
  std::string integrator = "cf4";
  OptimizerSettings optimizer;
  json sections = json::object();  // spectrum, noise, twoqubit, convergence

  void validate() const {
    static const std::vector<std::string> schemes{"X", "Y_DRAG", "Z_ROBUSTLINE", "Z_STRAIGHT", "KERR_GATE", "IDLE"};
    if (std::find(schemes.begin(), schemes.end(), scheme) == schemes.end())
      throw ConfigError("unknown scheme '" + scheme + "'");
    if (alpha2_list.empty() || T_list.empty()) throw ConfigError("alpha2_list and T_list must be non-empty");
    for (double a : alpha2_list)
      if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha2 entries must be >= 0");
    for (double t : T_list)
      if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("T entries must be > 0");
    if (!(delta_max > 0.0)) throw ConfigError("delta_max must be > 0");
    if (delta_points < 3 || delta_points % 2 == 0) throw ConfigError("delta_points must be odd and >= 3");
    if (fock_dim < 2) throw ConfigError("fock_dim must be >= 2");
    if (!(kerr > 0.0)) throw ConfigError("kerr must be > 0");
    if (drag != "exact" && drag != "approx" && drag != "off") throw ConfigError("drag must be exact|approx|off");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (integrator != "cf4" && integrator != "midpoint") throw ConfigError("integrator must be cf4|midpoint");
    if (optimizer.coarse_n < 5) throw ConfigError("optimizer.coarse_n must be >= 5");
    if (optimizer.refine_rounds < 0) throw ConfigError("optimizer.refine_rounds must be >= 0");
    if (!(optimizer.scale.first < optimizer.scale.second)) throw ConfigError("optimizer.scale must be [lo, hi]");
  }

  DragMode drag_mode() const {
    return drag == "exact" ? DragMode::Exact : drag == "approx" ? DragMode::Approx : DragMode::Off;
  }

  PropagationOptions propagation() const {
    PropagationOptions o;
    o.default_steps = steps;
    o.integrator = integrator == "cf4" ? Integrator::CF4 : Integrator::Midpoint;
    return o;
  }

  const json& section(const std::string& name) const {
    static const json empty = json::object();
    const auto it = sections.find(name);
    return it == sections.end() ? empty : *it;
  }
};

inline json to_json(const SweepConfig& c) {
  json j;
  j["scheme"] = c.scheme;
  j["alpha2_list"] = c.alpha2_list;
  j["T_list"] = c.T_list;
  j["delta_max"] = c.delta_max;
  j["delta_points"] = c.delta_points;
  j["fock_dim"] = c.fock_dim;
  j["seed"] = c.seed;
  j["kerr"] = c.kerr;
  j["drag"] = c.drag;
  j["propagation"] = {{"steps", c.steps}, {"integrator", c.integrator}};
  j["optimizer"] = {{"coarse_n", c.optimizer.coarse_n},
                    {"refine_rounds", c.optimizer.refine_rounds},
                    {"scale", {c.optimizer.scale.first, c.optimizer.scale.second}},
                    {"amp_max", c.optimizer.amp_max}};
  for (const auto& [k, v] : c.sections.items()) j[k] = v;
  return j;
}

inline SweepConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"scheme",  "alpha2_list", "T_list",      "delta_max", "delta_points",
                                              "fock_dim", "seed",       "kerr",        "drag",      "propagation",
                                              "optimizer", "spectrum",  "noise",       "twoqubit",  "convergence",
                                              "comment"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  SweepConfig c;
  try {
    c.scheme = j.value("scheme", c.scheme);
    c.alpha2_list = j.value("alpha2_list", c.alpha2_list);
    c.T_list = j.value("T_list", c.T_list);
    c.delta_max = j.value("delta_max", c.delta_max);
    c.delta_points = j.value("delta_points", c.delta_points);
    c.fock_dim = j.value("fock_dim", c.fock_dim);
    c.seed = j.value("seed", c.seed);
    c.kerr = j.value("kerr", c.kerr);
    c.drag = j.value("drag", c.drag);
    if (j.contains("propagation")) {
      const auto& p = j.at("propagation");
      c.steps = p.value("steps", c.steps);
      c.integrator = p.value("integrator", c.integrator);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.optimizer.coarse_n = o.value("coarse_n", c.optimizer.coarse_n);
      c.optimizer.refine_rounds = o.value("refine_rounds", c.optimizer.refine_rounds);
      c.optimizer.amp_max = o.value("amp_max", c.optimizer.amp_max);
      if (o.contains("scale")) {
        const auto s = o.at("scale").get<std::vector<double>>();
        if (s.size() != 2) throw ConfigError("optimizer.scale must have two entries");
        c.optimizer.scale = {s[0], s[1]};
      }
    }
    for (const char* name : {"spectrum", "noise", "twoqubit", "convergence"})
      if (j.contains(name)) c.sections[name] = j.at(name);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

/// FNV-1a 64 over the canonical (sorted-key) dump.
inline std::string config_hash(const SweepConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Writes files under the output directory; CSV rows get version and hash columns.
class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, const SweepConfig& config)
      : dir_(std::move(dir)), hash_(config_hash(config)), config_(to_json(config)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + dir_.string());
  }

  const std::string& hash() const noexcept { return hash_; }

  void csv(const std::string& name, const std::string& body) const {
    std::istringstream in(body);
    std::ostringstream out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out << line << (header ? ",code_version,config_hash" : "," + std::string(kCodeVersion) + "," + hash_) << '\n';
      header = false;
    }
    write(name, out.str());
  }

  void json_file(const std::string& name, json body) const {
    body["code_version"] = kCodeVersion;
    body["config_hash"] = hash_;
    body["config"] = config_;
    write(name, body.dump(2) + "\n");
  }

 private:
  void write(const std::string& name, const std::string& text) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) fail(ErrorKind::Io, "cannot write " + (dir_ / name).string());
    f << text;
    if (!f) fail(ErrorKind::Io, "write failed for " + (dir_ / name).string());
  }

  std::filesystem::path dir_;
  std::string hash_;
  json config_;
};

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------- spectrum / robust line

inline void cmd_spectrum(const SweepConfig& c, const OutputSink& out) {
  const auto& s = c.section("spectrum");
  const auto dg = s.value("delta", std::vector<double>{0.0, 1.0, 50.0});
  const auto ag = s.value("alpha2", std::vector<double>{0.0, 3.0, 50.0});
  if (dg.size() != 3 || ag.size() != 3 || dg[2] < 2 || ag[2] < 2)
    throw ConfigError("spectrum.delta and spectrum.alpha2 must be [lo, hi, n] with n >= 2");
  const FockSpace space(c.fock_dim);
  const auto deltas = linspace(dg[0] * c.kerr, dg[1] * c.kerr, static_cast<int>(dg[2]));
  const auto alphas = linspace(ag[0], ag[1], static_cast<int>(ag[2]));
  std::ostringstream land;
  gap_landscape(deltas, alphas, space, c.kerr).write_csv(land);
  out.csv("landscape.csv", land.str());
  std::ostringstream line;
  line << "alpha2,delta_rob,gap\n";
  for (double a2 : alphas) {
    try {
      const double d = robust_line(a2, space, c.kerr);
      line << fmt(a2) << ',' << fmt(d) << ',' << fmt(gap_point_raw(d, a2 * c.kerr, c.kerr, c.fock_dim).gap) << '\n';
    } catch (const Error&) {
      // no robust point: the row is omitted
    }
  }
  out.csv("robust_line.csv", line.str());
}

inline void cmd_robust_line(const SweepConfig& c, const OutputSink& out) {
  const FockSpace space(c.fock_dim);
  std::ostringstream os;
  os << "alpha2,delta_rob,gap,curvature,n_roots\n";
  json rows = json::array();
  for (double a2 : c.alpha2_list) {
    const auto roots = robust_line_roots(a2, space, c.kerr);
    json r{{"alpha2", a2}, {"roots", json::array()}};
    for (const auto& x : roots)
      r["roots"].push_back({{"delta", x.delta}, {"gap", x.gap}, {"maximum", x.maximum}, {"residual", x.deriv}});
    try {
      const double d = robust_line(a2, space, c.kerr);
      const double h = 1e-4 * c.kerr;
      const double curv = (gap_point_raw(d + h, a2 * c.kerr, c.kerr, c.fock_dim).deriv -
                           gap_point_raw(d - h, a2 * c.kerr, c.kerr, c.fock_dim).deriv) / (2.0 * h);
      os << fmt(a2) << ',' << fmt(d) << ',' << fmt(gap_point_raw(d, a2 * c.kerr, c.kerr, c.fock_dim).gap) << ','
         << fmt(curv) << ',' << roots.size() << '\n';
      r["delta_rob"] = d;
    } catch (const Error& e) {
      r["delta_rob"] = nullptr;
      r["error"] = e.what();
    }
    rows.push_back(r);
  }
  out.csv("robust_line.csv", os.str());
  out.json_file("robust_line.json", {{"points", rows}});
}

// ---------------------------------------------------------------- gates

inline SchemeProblem make_problem(const SweepConfig& c, double alpha2, double T, const FockSpace& space) {
  const auto p = KerrCatParams::from_alpha2(alpha2, c.kerr);
  SchemeProblem prob;
  if (c.scheme == "X") {
    prob = x_problem(T, p, c.optimizer.amp_max, c.optimizer.scale);
  } else if (c.scheme == "Y_DRAG") {
    prob = y_problem(T, p, c.drag_mode(), space, c.optimizer.amp_max, c.optimizer.scale);
  } else if (c.scheme == "Z_ROBUSTLINE") {
    prob = z_robust_problem(T, p, space);
  } else if (c.scheme == "Z_STRAIGHT") {
    prob = z_straight_problem(T, p, space);
  } else {
    throw ConfigError("scheme " + c.scheme + " has no free parameters");
  }
  prob.space.coarse_n = c.optimizer.coarse_n;
  prob.space.refine_rounds = c.optimizer.refine_rounds;
  return prob;
}

inline PulseSchedule idle_schedule(double T) {
  PulseSchedule s;
  s.duration = T;
  s.tag = SchemeTag::Z_STRAIGHT;
  s.target = Matrix::Identity(2, 2);
  return s;
}

/// Diagnostics and Delta trace of a finished schedule.
inline json evaluate_schedule(const OscillatorModel& model, const PulseSchedule& s, const SweepConfig& c,
                              int threads) {
  const auto opt = c.propagation();
  const auto grid = average_infidelity(model, s, c.delta_max * c.kerr, c.delta_points, opt, threads);
  const auto prop = propagate_states(model, s, 0.0, model.computational(), opt);
  json j;
  j["avg_infidelity"] = grid.average;
  j["deltas"] = grid.deltas;
  j["infidelities"] = grid.infidelities;
  j["unitarity_defect"] = prop.unitarity_defect;
  j["max_leakage"] = prop.max_leakage_flux;
  if (s.tag == SchemeTag::Y_DRAG || s.tag == SchemeTag::Z_ROBUSTLINE || s.tag == SchemeTag::Z_STRAIGHT) {
    j["adiabaticity_ratio"] = adiabaticity_diagnostic(s, model.params(), model.space());
  } else {
    j["adiabaticity_ratio"] = nullptr;
  }
  if (!s.single_photon() && s.tag != SchemeTag::KERR_GATE) {
    const auto am = angle_model(s, model.params(), model.space());
    j["theta0"] = am.theta0;
    j["first_order_coefficient"] = am.slope;
  }
  j["schedule_params"] = s.params;
  return j;
}

/// One (alpha^2, T) point of a gate sweep.
inline json gate_point(const SweepConfig& c, double alpha2, double T, int threads) {
  json rec{{"alpha2", alpha2}, {"T", T}, {"scheme", c.scheme}};
  try {
    const FockSpace space(c.fock_dim);
    const auto params = KerrCatParams::from_alpha2(alpha2, c.kerr);
    const OscillatorModel model(params, space);
    if (c.scheme == "KERR_GATE" || c.scheme == "IDLE") {
      const auto s = c.scheme == "KERR_GATE" ? scheme_kerr_gate(params) : idle_schedule(T);
      rec["T"] = s.duration;
      rec["feasible"] = true;
      rec["status"] = "ok";
      rec["best"] = json::array();
      rec.update(evaluate_schedule(model, s, c, threads));
      return rec;
    }
    const auto prob = make_problem(c, alpha2, T, space);
    const auto opt = optimize_scheme(prob, model, c.delta_max * c.kerr, c.delta_points, c.propagation(), threads);
    rec["param_names"] = opt.names;
    rec["best"] = opt.best;
    rec["best_params"] = opt.best_params();
    rec["evaluations"] = opt.evaluations;
    rec["feasible"] = opt.feasible;
    rec["optimizer_best"] = opt.best_avg_infidelity;
    rec["optimization"] = opt.to_json();
    if (!opt.feasible) {
      rec["status"] = "infeasible";
      return rec;
    }
    rec.update(evaluate_schedule(model, prob.builder(opt.best), c, threads));
    rec["status"] = "ok";
  } catch (const Error& e) {
    rec["status"] = "error";
    rec["feasible"] = false;
    rec["error"] = e.what();
  }
  return rec;
}

inline void cmd_gate_sweep(const SweepConfig& c, const OutputSink& out, int threads) {
  json records = json::array();
  std::ostringstream traces, summary;
  traces << "alpha2,T,Delta,infidelity\n";
  summary << "alpha2,T,avg_infidelity,feasible,status,params\n";
  const std::vector<double> times = c.scheme == "KERR_GATE" ? std::vector<double>{std::numbers::pi / c.kerr} : c.T_list;
  for (double a2 : c.alpha2_list) {
    for (double T : times) {
      const auto rec = gate_point(c, a2, T, threads);
      std::string params;
      if (rec.contains("best_params"))
        for (const auto& [k, v] : rec["best_params"].items()) params += (params.empty() ? "" : ";") + k + "=" + fmt(v.get<double>());
      summary << fmt(a2) << ',' << fmt(rec["T"].get<double>()) << ','
              << (rec.contains("avg_infidelity") ? fmt(rec["avg_infidelity"].get<double>()) : "nan") << ','
              << (rec["feasible"].get<bool>() ? 1 : 0) << ',' << rec["status"].get<std::string>() << ',' << params
              << '\n';
      if (rec.contains("infidelities"))
        for (std::size_t i = 0; i < rec["deltas"].size(); ++i)
          traces << fmt(a2) << ',' << fmt(rec["T"].get<double>()) << ',' << fmt(rec["deltas"][i].get<double>()) << ','
                 << fmt(rec["infidelities"][i].get<double>()) << '\n';
      records.push_back(rec);
    }
  }
  out.csv("infidelity_traces.csv", traces.str());
  out.csv("summary.csv", summary.str());
  out.json_file("gate_report.json", {{"records", records}});
}

/// Rebuilds the schedule of a stored gate record (used for round-trip checks).
inline PulseSchedule rebuild_schedule(const SweepConfig& c, const json& rec) {
  const double a2 = rec.at("alpha2").get<double>(), T = rec.at("T").get<double>();
  const auto params = KerrCatParams::from_alpha2(a2, c.kerr);
  if (c.scheme == "KERR_GATE") return scheme_kerr_gate(params);
  if (c.scheme == "IDLE") return idle_schedule(T);
  const FockSpace space(c.fock_dim);
  const auto best = rec.at("best").get<std::vector<double>>();
  return make_problem(c, a2, T, space).builder(best);
}

// ---------------------------------------------------------------- noise

/// Schedule named in the noise / convergence sections, or the scheme default.
inline PulseSchedule configured_schedule(const SweepConfig& c, const json& sec, double alpha2, double T,
                                         const FockSpace& space) {
  const auto p = KerrCatParams::from_alpha2(alpha2, c.kerr);
  const json params = sec.value("params", json::object());
  auto get = [&](const char* k, double def) { return params.value(k, def); };
  if (c.scheme == "X") return scheme_x(T, get("eps_x0", x_seed(T, alpha2)), p);
  if (c.scheme == "Y_DRAG") {
    const double e2 = get("eps2_ramp0", -0.5 * p.eps2_0);
    return scheme_y_drag(T, get("eps_y0", y_seed(T, e2, p)), e2, p, c.drag_mode(), space);
  }
  if (c.scheme == "Z_ROBUSTLINE" || c.scheme == "Z_STRAIGHT") {
    const bool robust = c.scheme == "Z_ROBUSTLINE";
    const auto prob = robust ? z_robust_problem(T, p, space) : z_straight_problem(T, p, space);
    const double x0 = robust ? get("tau", 0.2 * T) : get("delta_max", 0.5 * c.kerr);
    double e2 = get("eps2_ramp0", std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(e2)) {
      // ramp depth not given: shallowest one reaching the target angle
      const auto [lo, hi] = prob.space.bounds[1];
      const auto roots = detail::scan_roots(
          [&](double e) {
            const double x[2] = {x0, e};
            return prob.angle_residual(x);
          },
          lo, hi, kRootScan, 1e-10);
      if (roots.empty()) fail(ErrorKind::SchemeInfeasible, "no ramp depth reaches the target angle");
      e2 = roots.back();
    }
    const double x[2] = {x0, e2};
    return prob.builder(x);
  }
  if (c.scheme == "KERR_GATE") return scheme_kerr_gate(p);
  return idle_schedule(T);
}

inline NoiseModel noise_model(const SweepConfig& c, const json& sec, double T) {
  NoiseModel m;
  try {
    m.kind = noise_kind_from_string(sec.value("kind", std::string("ou")));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  m.seed = c.seed;
  switch (m.kind) {
    case NoiseKind::Static: m.parameters["value"] = sec.value("value", c.delta_max * c.kerr); break;
    case NoiseKind::Quasistatic: m.parameters["sigma"] = sec.value("sigma", c.delta_max * c.kerr); break;
    case NoiseKind::OrnsteinUhlenbeck:
      m.parameters["sigma"] = sec.value("sigma", c.delta_max * c.kerr);
      m.parameters["tau_c"] = sec.contains("tau_c") ? sec["tau_c"].get<double>() : sec.value("tau_c_over_T", 10.0) * T;
      break;
    case NoiseKind::TabulatedPsd:
      if (!sec.contains("psd")) throw ConfigError("tabulated noise needs noise.psd {omega, value}");
      m.psd_omega = sec["psd"].at("omega").get<std::vector<double>>();
      m.psd_values = sec["psd"].at("value").get<std::vector<double>>();
      break;
  }
  m.validate();
  return m;
}

inline void cmd_noise(const SweepConfig& c, const OutputSink& out, int threads) {
  const auto& sec = c.section("noise");
  const FockSpace space(c.fock_dim);
  const double a2 = c.alpha2_list.front(), T = c.T_list.front();
  const auto params = KerrCatParams::from_alpha2(a2, c.kerr);
  const auto s = configured_schedule(c, sec, a2, T, space);
  if (s.single_photon()) throw ConfigError("noise analysis needs a parity-conserving (Z-type) schedule");
  const auto model = noise_model(c, sec, s.duration);
  const auto omegas = default_omega_grid(s.duration, sec.value("omega_n", 512));
  const auto tr = trajectory(s, params, space);
  const auto W = filter_weight(tr, omegas);
  const auto est = spectral_average_infidelity(W, model);

  std::ostringstream wcsv, scsv;
  W.write_csv(wcsv);
  out.csv("filter.csv", wcsv.str());
  scsv << "omega,value\n";
  for (double w : omegas) scsv << fmt(w) << ',' << fmt(model.psd(w)) << '\n';
  out.csv("psd.csv", scsv.str());

  json rep;
  rep["schedule_params"] = s.params;
  rep["T"] = s.duration;
  rep["alpha2"] = a2;
  rep["W0"] = W.W.front();
  rep["spectral_infidelity"] = est.value;
  rep["tail_fraction"] = est.tail_fraction;
  rep["coverage_warning"] = est.coverage_warning;
  const int n_angle = sec.value("angle_realizations", 1000);
  const double dt = sec.value("dt", s.duration / 2000.0);
  if (n_angle > 0) {
    std::vector<double> th(n_angle);
    parallel_for(n_angle, threads, [&](int k) {
      th[k] = angle_error_functional(tr, sample_noise(model, s.duration, dt, static_cast<std::uint64_t>(k)));
    });
    double m2 = 0.0;
    for (double x : th) m2 += x * x;
    rep["angle_error_variance"] = m2 / n_angle;
    rep["angle_error_infidelity"] = 0.25 * m2 / n_angle;
  }
  const int n_mc = sec.value("realizations", 0);
  if (n_mc > 0) {
    const OscillatorModel osc(params, space);
    const auto mc = monte_carlo_infidelity(osc, s, model, n_mc, dt, c.propagation(), threads);
    rep["monte_carlo"] = {{"mean", mc.mean}, {"std_error", mc.std_error}, {"baseline", mc.baseline},
                          {"realizations", n_mc}};
  }
  out.json_file("noise_report.json", rep);
}

// ---------------------------------------------------------------- two qubits

inline void cmd_twoqubit(const SweepConfig& c, const OutputSink& out) {
  const auto& sec = c.section("twoqubit");
  const double theta = sec.value("theta", std::numbers::pi / 2);
  const double t_half = sec.value("t_half", c.T_list.front());
  const double phase = sec.value("phase", 0.0);
  const std::string which = sec.value("echo", std::string("A"));
  if (which != "A" && which != "B") throw ConfigError("twoqubit.echo must be A or B");
  const auto q = which == "A" ? EchoQubit::A : EchoQubit::B;
  const int full_dim = sec.value("full_dim", 0);
  const auto shifts = sec.value("shifts", std::vector<double>{c.delta_max * c.kerr, c.delta_max * c.kerr});
  if (shifts.size() != 2) throw ConfigError("twoqubit.shifts must be [Delta_A, Delta_B]");
  std::vector<std::vector<double>> pairs;
  if (sec.contains("pairs")) {
    pairs = sec["pairs"].get<std::vector<std::vector<double>>>();
  } else {
    for (double a : c.alpha2_list) pairs.push_back({a, a});
  }
  std::ostringstream os;
  os << "alpha2_A,alpha2_B,echo_distance,g0,makhlin_g1_re,makhlin_g1_im,makhlin_g2,full_infidelity,shifted_infidelity\n";
  json rows = json::array();
  for (const auto& pr : pairs) {
    if (pr.size() != 2) throw ConfigError("twoqubit.pairs entries must be [alpha2_A, alpha2_B]");
    const auto pa = KerrCatParams::from_alpha2(pr[0], c.kerr), pb = KerrCatParams::from_alpha2(pr[1], c.kerr);
    const auto echo = echo_xx(theta, pa, pb, t_half, q, phase);
    const auto mk = makhlin_invariants(echo.unitary);
    double full = std::numeric_limits<double>::quiet_NaN(), shifted = full;
    if (full_dim > 0) {
      const TwoModeModel tm(pa, pb, FockSpace(full_dim), FockSpace(full_dim), phase);
      const Matrix target = rot_xx(theta);
      full = infidelity(Matrix(full_echo_xx(tm, echo, t_half, 0.0, 0.0, q, c.steps)), target);
      shifted = infidelity(Matrix(full_echo_xx(tm, echo, t_half, shifts[0], shifts[1], q, c.steps)), target);
    }
    os << fmt(pr[0]) << ',' << fmt(pr[1]) << ',' << fmt(echo.distance) << ',' << fmt(echo.g0) << ','
       << fmt(mk.g1.real()) << ',' << fmt(mk.g1.imag()) << ',' << fmt(mk.g2) << ',' << fmt(full) << ','
       << fmt(shifted) << '\n';
    json r{{"alpha2_A", pr[0]}, {"alpha2_B", pr[1]}, {"echo_distance", echo.distance}, {"g0", echo.g0},
           {"eta", echo.eta}, {"makhlin_g1", {mk.g1.real(), mk.g1.imag()}}, {"makhlin_g2", mk.g2}};
    if (full_dim > 0) {
      r["full_infidelity"] = full;
      r["shifted_infidelity"] = shifted;
    }
    rows.push_back(r);
  }
  out.csv("twoqubit.csv", os.str());
  out.json_file("twoqubit.json", {{"theta", theta}, {"t_half", t_half}, {"phase", phase}, {"rows", rows}});
}

// ---------------------------------------------------------------- convergence

struct ConvergencePoint {
  double alpha2, T, base, dim_doubled, dt_halved, drift;
};

inline ConvergencePoint convergence_point(const SweepConfig& c, const json& sec, double alpha2, double T, int threads) {
  auto run = [&](int dim, int steps) {
    const FockSpace space(dim);
    const auto params = KerrCatParams::from_alpha2(alpha2, c.kerr);
    const OscillatorModel model(params, space);
    const auto s = configured_schedule(c, sec, alpha2, T, space);
    auto opt = c.propagation();
    opt.default_steps = steps;
    return average_infidelity(model, s, c.delta_max * c.kerr, c.delta_points, opt, threads).average;
  };
  ConvergencePoint p{alpha2, T, 0, 0, 0, 0};
  p.base = run(c.fock_dim, c.steps);
  p.dim_doubled = run(2 * c.fock_dim, c.steps);
  p.dt_halved = run(c.fock_dim, 2 * c.steps);
  p.drift = std::max(std::abs(p.dim_doubled - p.base), std::abs(p.dt_halved - p.base));
  return p;
}

inline bool cmd_convergence(const SweepConfig& c, const OutputSink& out, int threads) {
  const auto& sec = c.section("convergence");
  const double threshold = sec.value("threshold", 1e-8);
  std::ostringstream os;
  os << "alpha2,T,base,dim_doubled,dt_halved,drift,pass\n";
  json rows = json::array();
  bool all = true;
  for (double a2 : c.alpha2_list) {
    for (double T : c.T_list) {
      const auto p = convergence_point(c, sec, a2, T, threads);
      const bool pass = p.drift < threshold;
      all = all && pass;
      os << fmt(a2) << ',' << fmt(p.T) << ',' << fmt(p.base) << ',' << fmt(p.dim_doubled) << ',' << fmt(p.dt_halved)
         << ',' << fmt(p.drift) << ',' << (pass ? 1 : 0) << '\n';
      rows.push_back({{"alpha2", a2}, {"T", T}, {"base", p.base}, {"dim_doubled", p.dim_doubled},
                      {"dt_halved", p.dt_halved}, {"drift", p.drift}, {"pass", pass}});
    }
  }
  out.csv("convergence.csv", os.str());
  out.json_file("convergence.json", {{"threshold", threshold}, {"points", rows}, {"pass", all}});
  return all;
}

}  // namespace kerrcat::cli
