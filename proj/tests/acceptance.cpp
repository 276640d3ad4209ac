// End-to-end acceptance run: one PASS/FAIL line per criterion, details on the
// following lines and a JSON report in the working directory. Exit status is
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "kerrcat/sweep.hpp"

using namespace kerrcat;
using namespace kerrcat::cli;
using std::numbers::pi;

namespace {

json g_report = json::object();
int g_failed = 0;

struct Check {
  std::string name;
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    ok = ok && cond;
    notes.push_back(std::string(cond ? "  ok   " : "  FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("  .    " + what); }
};

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

template <class F>
void criterion(int id, const std::string& title, F&& body) {
  Check c;
  c.name = title;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << std::fixed
            << std::setprecision(0) << secs << " s)" << std::defaultfloat << '\n';
  for (const auto& n : c.notes) std::cout << n << '\n';
  std::cout.flush();
  if (!c.ok) ++g_failed;
  g_report[std::to_string(id)] = {{"title", title}, {"pass", c.ok}, {"notes", c.notes}, {"seconds", secs}};
}

SweepConfig config(json j) {
  if (!j.contains("fock_dim")) j["fock_dim"] = 40;
  return parse_config(j);
}

double max_unitarity_defect = 0.0;

json point(const SweepConfig& c, double a2, double T) {
  auto rec = gate_point(c, a2, T, 1);
  if (rec.contains("unitarity_defect"))
    max_unitarity_defect = std::max(max_unitarity_defect, rec["unitarity_defect"].get<double>());
  return rec;
}

double avg(const json& rec) { return rec.contains("avg_infidelity") ? rec["avg_infidelity"].get<double>() : 1.0; }

std::string describe(const json& rec) {
  std::ostringstream os;
  os << "alpha2=" << rec["alpha2"] << " T=" << rec["T"] << " status=" << rec["status"].get<std::string>();
  if (rec.contains("avg_infidelity")) os << " Ibar=" << sci(avg(rec));
  if (rec.contains("best_params") && !rec["best_params"].empty()) os << " params=" << rec["best_params"].dump();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KERRCAT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// optimum records shared between criteria
json zs_record, zr_record, x_record, y_record;

}  // namespace

int main() {
  const FockSpace space40(40);

  criterion(1, "degeneracy and exponential protection", [&](Check& c) {
    for (double a2 : {0.5, 1.0, 2.0, 3.0}) {
      const double g = std::abs(gap_point_raw(0.0, a2, 1.0, 40).gap);
      c.require(g < 1e-9, "|E01(0)| = " + sci(g) + " at alpha2 = " + fmt(a2));
    }
    for (double a2 = 1.5; a2 <= 3.0 + 1e-12; a2 += 0.25) {
      const double d = gap_point_raw(0.0, a2, 1.0, 40).deriv, ref = 4.0 * a2 * std::exp(-2.0 * a2);
      c.require(std::abs(d / ref - 1.0) <= 0.15,
                "dE01/ddelta(0) = " + sci(d) + " vs 4a2 e^-2a2 = " + sci(ref) + " at alpha2 = " + fmt(a2));
    }
  });

  criterion(2, "matrix elements", [&](Check& c) {
    const Matrix a = build_ladder(space40).matrix;
    for (double a2 : {0.5, 1.0, 2.0, 3.0}) {
      const auto spec =
          diagonalize_labeled(build_hamiltonian(KerrCatParams::from_alpha2(a2), space40), parity_operator(space40));
      const double hx = std::abs(spec.state(1).dot((a + a.adjoint()) * spec.state(0)));
      const auto h = matrix_elements_alpha2(a2);
      c.require(std::abs(hx - h.h_x) < 1e-8, "|h_x num - closed| = " + sci(std::abs(hx - h.h_x)) + " at alpha2 = " + fmt(a2));
      c.require(std::abs(h.h_y / h.h_x - std::exp(-2.0 * a2)) < 1e-10, "h_y/h_x = e^-2a2 at alpha2 = " + fmt(a2));
    }
    const auto h0 = matrix_elements(0.0), hs = matrix_elements(1e-6);
    c.require(std::abs(h0.h_x - 1.0) < 1e-12 && std::abs(h0.h_y - 1.0) < 1e-12 && std::abs(hs.h_x - 1.0) < 1e-10,
              "alpha -> 0 gives h_x = h_y = 1");
  });

  criterion(3, "X(pi/2) robustness", [&](Check& c) {
    const auto cfg = config({{"scheme", "X"}});
    x_record = point(cfg, 3.0, 40.0);
    c.note(describe(x_record));
    double worst = 0.0;
    for (const auto& v : x_record["infidelities"]) worst = std::max(worst, v.get<double>());
    c.require(worst <= 2e-4, "max node infidelity " + sci(worst) + " <= 2e-4");
    c.require(avg(x_record) <= 1e-4, "Ibar " + sci(avg(x_record)) + " <= 1e-4");
    double prev = 2.0;
    bool decreasing = true;
    for (double a2 : {1.0, 2.0, 3.0}) {
      const auto r = point(cfg, a2, 30.0);
      c.note(describe(r));
      decreasing = decreasing && avg(r) < prev;
      prev = avg(r);
    }
    c.require(decreasing, "Ibar strictly decreases alpha2 = 1 -> 2 -> 3 at T = 30");
  });

  criterion(4, "Y(pi/2) with DRAG saturates", [&](Check& c) {
    const auto cfg = config({{"scheme", "Y_DRAG"}, {"drag", "exact"}, {"optimizer", {{"coarse_n", 11}}}});
    double best2 = 1.0;
    for (double T : {30.0, 25.0, 20.0}) {
      const auto r = point(cfg, 2.0, T);
      c.note(describe(r));
      if (T == 30.0) y_record = r;
      best2 = std::min(best2, avg(r));
      if (best2 < 1e-4) break;
    }
    c.require(best2 < 1e-4, "best Ibar(alpha2 = 2, T <= 30) = " + sci(best2) + " < 1e-4");
    const auto r3 = point(cfg, 3.0, 30.0);
    c.note(describe(r3));
    const double gain = avg(y_record) / avg(r3);
    c.require(gain < 3.0, "Ibar(2)/Ibar(3) at T = 30 is " + sci(gain) + " < 3");
    const auto off = config({{"scheme", "Y_DRAG"}, {"drag", "off"}, {"optimizer", {{"coarse_n", 11}}}});
    const auto n2 = point(off, 2.0, 30.0), n0 = point(off, 0.0, 30.0);
    c.note("no DRAG: " + describe(n2));
    c.note("no DRAG: " + describe(n0));
    if (n2.contains("best_params") && n2["best_params"].contains("eps2_ramp0"))
      c.note("no-DRAG dip depth eps2_ramp0 / eps2_0 = " + sci(n2["best_params"]["eps2_ramp0"].get<double>() / 2.0));
    const double ratio = avg(n2) / avg(n0);
    c.require(ratio <= 3.0 && ratio >= 1.0 / 3.0, "Ibar(no DRAG, 2) / Ibar(0) = " + sci(ratio) + " within 3x");
  });

  criterion(5, "Z(-pi/2) on the robust line", [&](Check& c) {
    const auto cfg = config({{"scheme", "Z_ROBUSTLINE"}});
    bool in_range = true;
    double best = 1.0;
    for (double a2 : {2.0, 3.0}) {
      for (double T : {25.0, 30.0, 40.0, 50.0}) {
        const auto r = point(cfg, a2, T);
        c.note(describe(r));
        if (a2 == 2.0 && T == 30.0) zr_record = r;
        const double v = avg(r);
        in_range = in_range && r["status"] == "ok" && v >= 1e-7 && v <= 1e-3;
        best = std::min(best, v);
      }
    }
    c.require(in_range, "every optimized Ibar in [1e-7, 1e-3]");
    c.require(best <= 1e-4, "best Ibar " + sci(best) + " <= 1e-4");
    // feasibility edge at alpha2 = 1
    const auto p1 = KerrCatParams::from_alpha2(1.0);
    double last = 0.0;
    for (double T = 15.0; T <= 30.0 + 1e-9; T += 1.0) {
      if (angle_reachable(z_robust_problem(T, p1, space40))) last = T;
    }
    c.require(last >= 19.0 && last <= 25.0, "alpha2 = 1 feasible up to T = " + fmt(last) + " (edge expected 22 +- 3)");
    const auto r = point(cfg, 1.0, 26.0);
    c.require(r["status"] == "infeasible", "alpha2 = 1, T = 26 reported " + r["status"].get<std::string>());
  });

  criterion(6, "Z(-pi/2) on the straight line", [&](Check& c) {
    const auto cfg = config({{"scheme", "Z_STRAIGHT"}});
    for (double a2 : {2.0, 3.0}) {
      bool found = false;
      for (double T : {30.0, 40.0}) {
        const auto r = point(cfg, a2, T);
        c.note(describe(r));
        if (a2 == 2.0 && T == 30.0) zs_record = r;
        if (r["status"] != "ok") continue;
        const double slope = std::abs(r["first_order_coefficient"].get<double>());
        c.note("  |int dE01/ddelta dt| = " + sci(slope) + ", 1e-3 T = " + sci(1e-3 * T));
        found = found || (avg(r) <= 1e-5 && slope < 1e-3 * T);
      }
      c.require(found, "alpha2 = " + fmt(a2) + ": some T with Ibar <= 1e-5 and |slope| < 1e-3 T");
    }
  });

  criterion(7, "Kerr-gate baseline", [&](Check& c) {
    std::map<double, double> inf;
    for (double a2 : {1.5, 2.0, 3.0}) {
      const auto p = KerrCatParams::from_alpha2(a2);
      const OscillatorModel model(p, space40);
      inf[a2] = gate_infidelity(model, scheme_kerr_gate(p), 5e-3);
      const double ref = kerr_gate_infidelity_model(a2, 5e-3, pi);
      c.require(inf[a2] / ref <= 2.0 && inf[a2] / ref >= 0.5,
                "I = " + sci(inf[a2]) + " vs a2 D^2 T^2 = " + sci(ref) + " at alpha2 = " + fmt(a2));
    }
    const double ratio = inf[3.0] / inf[1.5];
    c.require(ratio >= 1.4 && ratio <= 2.6, "I(3)/I(1.5) = " + sci(ratio));
  });

  criterion(8, "spectral noise consistency", [&](Check& c) {
    const auto p = KerrCatParams::from_alpha2(2.0);
    const OscillatorModel model(p, space40);
    const double T = 30.0;
    // (a) straight-line optimum: static curvature vs W(0)
    if (zs_record.is_null() || zs_record["status"] != "ok") {
      c.require(false, "no straight-line optimum available");
    } else {
      const auto cfg = config({{"scheme", "Z_STRAIGHT"}});
      const auto s = rebuild_schedule(cfg, zs_record);
      const double w0 = filter_weight(s, p, space40, {0.0}).W[0];
      const double taylor = static_taylor_coefficient(model, s, 5e-3);
      c.require(std::abs(w0 / taylor - 1.0) <= 0.3,
                "straight line: W(0) = " + sci(w0) + " vs static Taylor coefficient " + sci(taylor));
    }
    // (b) robust-line optimum: filter stays tiny against an unprotected gap
    if (zr_record.is_null() || zr_record["status"] != "ok") {
      c.require(false, "no robust-line optimum available");
    } else {
      const auto cfg = config({{"scheme", "Z_ROBUSTLINE"}});
      const auto s = rebuild_schedule(cfg, zr_record);
      const auto f = filter_weight(s, p, space40, default_omega_grid(T));
      const double wmax = *std::max_element(f.W.begin(), f.W.end());
      const double bound = 1e-10 * T * T;  // bare oscillator: dE01/ddelta = 1
      c.require(wmax < bound, "robust line: max W = " + sci(wmax) + " vs 1e-10 (T max|dE01|)^2 = " + sci(bound));
    }
    // (c) Monte-Carlo OU noise vs the spectral estimate on a detuned straight-line schedule
    json sec{{"params", {{"delta_max", 0.25}}}};
    const auto cfg = config({{"scheme", "Z_STRAIGHT"}, {"seed", 2024}});
    const auto s = configured_schedule(cfg, sec, 2.0, T, space40);
    NoiseModel noise;
    noise.kind = NoiseKind::OrnsteinUhlenbeck;
    noise.parameters = {{"sigma", 5e-3}, {"tau_c", 10.0 * T}};
    noise.seed = 2024;
    const auto est = spectral_average_infidelity(filter_weight(s, p, space40, default_omega_grid(T)), noise);
    const auto mc = monte_carlo_infidelity(model, s, noise, 200, T / 2000.0);
    c.note("schedule " + json(s.params).dump() + ", noiseless " + sci(mc.baseline));
    const double ratio = mc.mean / est.value;
    c.require(ratio >= 0.5 && ratio <= 2.0, "Monte Carlo " + sci(mc.mean) + " +- " + sci(mc.std_error) +
                                                " (200 traces) vs spectral " + sci(est.value));
  });

  criterion(9, "two-qubit properties", [&](Check& c) {
    const auto a = KerrCatParams::from_alpha2(1.5), b = KerrCatParams::from_alpha2(2.0);
    double worst = 0.0;
    for (double theta : {pi / 2, 0.4})
      for (auto q : {EchoQubit::A, EchoQubit::B}) worst = std::max(worst, echo_xx(theta, a, b, 20.0, q).distance);
    c.require(worst < 1e-10, "echo distance to XX(theta) " + sci(worst));
    const auto z = KerrCatParams::from_alpha2(0.0);
    const auto coeff = pauli_coefficients(effective_generator(make_effective_model(z, z, {})));
    c.require(std::abs(coeff(1, 1) - 0.5) < 1e-14 && std::abs(coeff(2, 2) - 0.5) < 1e-14 &&
                  std::abs(coeff(3, 3)) < 1e-14,
              "alpha2 = 0 generator is (XX + YY)/2");
    c.require(phase_distance(effective_unitary(make_effective_model(z, z, {}), -pi / 2), iswap()) < 1e-12,
              "alpha2 = 0 beamsplitter gives iSWAP");
    const TwoModeModel tm(a, a, FockSpace(14), FockSpace(14));
    const double T = 20.0;
    const auto g = full_pulse(T, coupling_amplitude(0.4, T, a, a));
    const auto r = full_two_mode_propagate(tm, g, 0.0, 0.0);
    const auto full = pauli_coefficients(projected_generator(tm.project(r.unitary)));
    const auto ref = pauli_coefficients(envelope_integral(g) * effective_generator(make_effective_model(a, a, g)));
    const double rel = std::abs(full(1, 1) / ref(1, 1) - 1.0);
    c.require(rel < 0.05, "full two-mode XX coefficient within " + sci(rel) + " of the projected model");
    c.require(std::abs(full(2, 2) - ref(2, 2)) < 0.05 * std::abs(ref(1, 1)), "YY coefficient within 5% of XX scale");
  });

  criterion(10, "numerical hygiene", [&](Check& c) {
    c.require(max_unitarity_defect < 1e-8, "max unitarity defect over evaluated optima " + sci(max_unitarity_defect));
    double hf = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double d = i / 9.0, a2 = 3.0 * j / 9.0, h = 1e-5;
        const double fd = (gap_point_raw(d + h, a2, 1.0, 40).gap - gap_point_raw(d - h, a2, 1.0, 40).gap) / (2 * h);
        hf = std::max(hf, std::abs(fd - gap_point_raw(d, a2, 1.0, 40).deriv));
      }
    c.require(hf < 1e-6, "Hellmann-Feynman vs finite difference " + sci(hf));

    struct Sample {
      std::string scheme;
      json rec;
    };
    const std::vector<Sample> samples{{"X", x_record}, {"Y_DRAG", y_record}, {"Z_ROBUSTLINE", zr_record},
                                      {"Z_STRAIGHT", zs_record}};
    for (const auto& smp : samples) {
      if (smp.rec.is_null() || smp.rec["status"] != "ok") {
        c.require(false, smp.scheme + ": no optimum to check");
        continue;
      }
      const auto cfg = config({{"scheme", smp.scheme}});
      const json sec{{"params", smp.rec["schedule_params"]}};
      const auto p = convergence_point(cfg, sec, smp.rec["alpha2"].get<double>(), smp.rec["T"].get<double>(), 1);
      c.require(p.drift < 1e-8, smp.scheme + " at alpha2 = " + fmt(p.alpha2) + ", T = " + fmt(p.T) +
                                    ": dim/step drift " + sci(p.drift) + " (Ibar " + sci(p.base) + ")");
    }

    namespace fs = std::filesystem;
    const auto base = fs::temp_directory_path() / "kerrcat_acceptance";
    fs::remove_all(base);
    const std::string smoke = std::string(KERRCAT_SOURCE_DIR) + "/configs/smoke.json";
    bool same = true;
    for (const char* cmd : {"gate-sweep", "spectrum", "twoqubit"}) {
      const auto a = base / (std::string(cmd) + "_a"), b = base / (std::string(cmd) + "_b");
      const int ea = run_cli(std::string(cmd) + " --config " + smoke + " --out " + a.string());
      const int eb = run_cli(std::string(cmd) + " --config " + smoke + " --out " + b.string());
      if (ea != 0 || eb != 0) same = false;
      for (const auto& e : fs::directory_iterator(a)) same = same && slurp(e.path()) == slurp(b / e.path().filename());
    }
    c.require(same, "byte-identical reruns of gate-sweep, spectrum and twoqubit under a fixed seed");
  });

  std::ofstream("acceptance_report.json") << g_report.dump(2) << '\n';
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed") << '\n';
  return g_failed == 0 ? 0 : 1;
}
