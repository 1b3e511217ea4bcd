#pragma once

// Subcommand bodies shared by the command-line tool and the tests. Each
// returns a process exit status.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "backpar/config.hpp"

namespace backpar {

enum ExitStatus : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitRuntime = 3 };

struct CommandOverrides {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
};

// Loads the config file (or defaults) and applies the command-line flags.
RunConfig resolve_config(const CommandOverrides& o);

int cmd_forward(const RunConfig& cfg, std::ostream& log);
int cmd_invert(const RunConfig& cfg, std::ostream& log);
int cmd_mise(const RunConfig& cfg, std::ostream& log);
int cmd_illposed(const RunConfig& cfg, std::ostream& log);
int cmd_validate(std::ostream& log);

// Runs one subcommand by name, mapping errors to exit statuses.
int run_command(const std::string& name, const CommandOverrides& o, std::ostream& log, std::ostream& err);

struct IllposedVerdict {
  bool data_matches = true;       // |E||G||^2 - delta^2 N| <= 3 se per delta, N the observed mode count
  bool solution_above = true;     // E sup ||V||^2 >= (2/5)/delta - 2 se per delta
  bool data_decreasing = true;
  bool solution_increasing = true;

  bool passed() const { return data_matches && solution_above && data_decreasing && solution_increasing; }
};

IllposedVerdict judge_illposed(const std::vector<IllposedRow>& rows);

}  // namespace backpar
