#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dpre/harness/commands.hpp"

namespace h = dpre::harness;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key=value or JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.overrides, "override a config key, e.g. --set free_energy.betas=0.5,1")
      ->type_name("SECTION.KEY=VALUE");
}

h::ExperimentConfig resolve(const Common& c) {
  auto cfg = c.config_path.empty() ? h::ExperimentConfig{} : h::load_config(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw h::ConfigError("--set expects SECTION.KEY=VALUE, got '" + kv + "'");
    h::set_field(cfg, h::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  if (c.seed) cfg.run.seed = *c.seed;
  if (c.threads) cfg.run.threads = *c.threads;
  if (c.out) cfg.run.out = *c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed polymers in a Gaussian random environment: free energy, overlap and localization experiments"};
  app.require_subcommand(1);

  Common common;
  auto* fe = app.add_subcommand("free-energy", "quenched free energy sweep, tail profile and multi-temperature check");
  add_common(fe, common);
  std::string betas, lengths;
  fe->add_option("--betas", betas, "comma-separated beta grid");
  fe->add_option("--lengths", lengths, "comma-separated N ladder");

  auto* ov = app.add_subcommand("overlap", "mean replica overlap and the integration-by-parts residual");
  add_common(ov, common);
  std::string mode;
  ov->add_option("--mode", mode, "monte_carlo or enumeration")->check(CLI::IsMember({"monte_carlo", "enumeration"}));

  auto* lo = app.add_subcommand("localize", "favorite-path extraction, coverage and distinguished sets");
  add_common(lo, common);
  std::string deltas;
  lo->add_option("--deltas", deltas, "comma-separated overlap thresholds");

  auto* ve = app.add_subcommand("verify", "run the oracle and property suites");
  add_common(ve, common);
  bool fault = false;
  ve->add_flag("--inject-fault", fault, "flip one environment value between determinism passes");

  auto* pd = app.add_subcommand("plotdata", "turn prior run outputs into tidy plotting series");
  add_common(pd, common);
  std::string input;
  pd->add_option("--in", input, "directory holding prior run outputs (default: the --out directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? h::kSuccess : h::kValidation;
  }

  try {
    auto cfg = resolve(common);
    h::CommandResult res;
    if (*fe) {
      if (!betas.empty()) h::set_field(cfg, "free_energy.betas", betas);
      if (!lengths.empty()) h::set_field(cfg, "free_energy.lengths", lengths);
      res = h::cmd_free_energy(cfg);
    } else if (*ov) {
      if (!mode.empty()) cfg.overlap.mode = mode;
      res = h::cmd_overlap(cfg);
    } else if (*lo) {
      if (!deltas.empty()) h::set_field(cfg, "localize.deltas", deltas);
      res = h::cmd_localize(cfg);
    } else if (*ve) {
      if (fault) cfg.verify.inject_fault = true;
      res = h::cmd_verify(cfg);
      if (res.exit_code != h::kSuccess)
        std::cerr << "verify: failed suites: " << res.record.metrics["failed_suites"].dump() << "\n";
    } else {
      res = h::cmd_plotdata(cfg, input.empty() ? cfg.run.out : input);
    }
    std::cout << res.record.command << ": wrote";
    for (const auto& [name, hash] : res.record.outputs.items()) std::cout << " " << name;
    std::cout << " to " << cfg.run.out << "\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kValidation;
  }
}
