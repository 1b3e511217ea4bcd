// backpar: forward solves, inversions, MISE sweeps, the ill-posedness demo
// and the validation suites from one executable.

#include <iostream>

#include <CLI11.hpp>

#include "backpar/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Backward parabolic reconstruction from noisy final-time data"};
  app.require_subcommand(1);

  backpar::CommandOverrides o;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t trials = 0;
  unsigned threads = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"forward", "Manufacture g and the reference trajectory"},
      {"invert", "Reconstruct from one noisy observation"},
      {"mise", "Monte Carlo MISE sweep over the delta grid"},
      {"illposed", "Unregularized instability demonstration"},
      {"validate", "Run the invariant suites of every module"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (std::string(name) == "validate") continue;
    sub->add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Global seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--threads", threads, "Worker threads (default BACKPAR_THREADS, then hardware)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : backpar::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "validate") return backpar::run_command("validate", o, std::cout, std::cerr);
  if (sub->count("--config")) o.config = config;
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--out")) o.out = out;
  if (sub->count("--trials")) o.trials = trials;
  if (sub->count("--threads")) o.threads = threads;
  return backpar::run_command(sub->get_name(), o, std::cout, std::cerr);
}
