#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lqts {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Property suites exposed by the `check` subcommand: riccati, posterior,
/// perturbation, sde. Each check draws from its own fixed seed.
std::vector<std::string> check_suite_names();
std::vector<CheckResult> run_check_suite(const std::string& suite, std::uint64_t seed = 7);

}  // namespace lqts
