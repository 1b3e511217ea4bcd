#pragma once

// Quick invariant suites across all modules, run by `backpar validate`.

#include <string>
#include <vector>

namespace backpar {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<SuiteResult> run_validation_suites();

}  // namespace backpar
