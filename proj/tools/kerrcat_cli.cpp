// kerrcat: command-line driver for spectra, gate sweeps, noise analysis and
// two-qubit checks. Exit codes: 0 success, 1 configuration error, 2 numerical
// failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "kerrcat/sweep.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<int> fock_dim;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--threads", c.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_option("--fock-dim", c.fock_dim, "Fock truncation (overrides the config)")->check(CLI::PositiveNumber);
}

kerrcat::cli::SweepConfig resolve(const Common& c) {
  using namespace kerrcat::cli;
  json j = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (c.seed) j["seed"] = *c.seed;
  if (c.fock_dim) j["fock_dim"] = *c.fock_dim;
  return parse_config(j);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace kerrcat::cli;
  CLI::App app{"Kerr-cat qubit gate simulator", "kerrcat"};
  app.set_version_flag("--version", std::string(kCodeVersion));
  app.require_subcommand(1);

  Common common;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectrum", "gap landscape over detuning and cat size, robust line"},
      {"robust-line", "robust detuning for each configured cat size"},
      {"gate-sweep", "optimize and evaluate the configured scheme over (alpha2, T)"},
      {"noise", "filter weighting, spectral estimate and Monte-Carlo check"},
      {"twoqubit", "echoed XX gate: effective and full two-mode checks"},
      {"convergence", "dimension-doubling and step-halving drift"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve(common);
    const OutputSink out(common.out, config);
    if (cmd == "spectrum") {
      cmd_spectrum(config, out);
    } else if (cmd == "robust-line") {
      cmd_robust_line(config, out);
    } else if (cmd == "gate-sweep") {
      cmd_gate_sweep(config, out, common.threads);
    } else if (cmd == "noise") {
      cmd_noise(config, out, common.threads);
    } else if (cmd == "twoqubit") {
      cmd_twoqubit(config, out);
    } else {
      if (!cmd_convergence(config, out, common.threads))
        std::cerr << "kerrcat: convergence drift above threshold (see convergence.json)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "kerrcat: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const kerrcat::Error& e) {
    std::cerr << "kerrcat: " << e.what() << '\n';
    return e.kind() == kerrcat::ErrorKind::Io ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "kerrcat: numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
