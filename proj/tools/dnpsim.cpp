#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dnp/engine.hpp"
#include "dnp/experiments.hpp"
#include "dnp/output.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Path to a JSON experiment config");
  cmd->add_option("--preset", args.preset, "Name of a committed preset config");
  cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
  cmd->add_option("--jobs", args.jobs, "Worker pool width for sweeps (0 = hardware)");
  auto* seed_opt = cmd->add_option("--seed", args.seed, "Master RNG seed (overrides config)");
  cmd->callback([&args, seed_opt] { args.seed_set = seed_opt->count() > 0; });
}

std::string preset_dir() {
  if (const char* env = std::getenv("DNPSIM_PRESET_DIR")) return env;
#ifdef DNPSIM_PRESET_DIR
  return DNPSIM_PRESET_DIR;
#else
  return "presets";
#endif
}

dnp::config::ExperimentConfig load_config(const CommonArgs& args) {
  std::string path = args.config_path;
  if (path.empty() && !args.preset.empty())
    path = dnp::config::preset_path(args.preset, preset_dir());
  if (path.empty())
    throw dnp::config::ConfigError("one of --config or --preset is required");
  auto cfg = dnp::config::parse_config_file(path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed_set) cfg.master_seed = args.seed;
  if (args.jobs > 0) cfg.jobs = args.jobs;
  return cfg;
}

void report(const dnp::experiments::CommandResult& result) {
  for (const auto& path : result.written_paths) std::printf("%s\n", path.c_str());
  std::printf("%s\n", result.summary.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed dynamic nuclear polarization simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args, amp_args, gen_args, sweep_args;
  auto* sim = app.add_subcommand("simulate", "Run polarization-transfer simulations");
  add_common(sim, sim_args);
  auto* amp = app.add_subcommand("amplitudes", "Scan transition-amplitude spectra");
  add_common(amp, amp_args);
  auto* gen = app.add_subcommand("cluster-gen", "Generate 13C cluster configurations");
  add_common(gen, gen_args);
  auto* sweep = app.add_subcommand("sweep", "Batch runs over clusters/fields with statistics");
  add_common(sweep, sweep_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      report(dnp::experiments::cmd_simulate(load_config(sim_args)));
    } else if (amp->parsed()) {
      report(dnp::experiments::cmd_amplitudes(load_config(amp_args)));
    } else if (gen->parsed()) {
      report(dnp::experiments::cmd_cluster_gen(load_config(gen_args)));
    } else if (sweep->parsed()) {
      report(dnp::experiments::cmd_sweep(load_config(sweep_args)));
    }
  } catch (const dnp::config::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const dnp::engine::NumericalHealthError& e) {
    std::fprintf(stderr, "numerical-health error: %s\n", e.what());
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
