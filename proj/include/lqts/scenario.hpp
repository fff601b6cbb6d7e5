#pragma once

#include "lqts/policies.hpp"
#include "lqts/types.hpp"

#include <string>
#include <vector>

namespace lqts {

/// A fully specified control problem: truth, cost, noise, grid, and the
/// defaults for the learning policies.
struct Scenario {
  std::string name;
  DriftParams truth;
  CostSpec cost;
  NoiseSpec noise;
  double dt = 1e-3;
  DitherSpec dither;
  double tau0 = 20.0;
  double growth = 0.1;
  Matrix initial_gain;  // q x p, stabilizes the truth

  Index p() const { return truth.p(); }
  Index q() const { return truth.q(); }

  /// Dimension checks, SPD checks, CARE solvability at the truth and
  /// stability of A + B G_init. Throws on the first violation.
  void validate() const;
};

/// Names of the built-in scenarios, in registry order.
std::vector<std::string> builtin_scenario_names();

/// Built-in scenario by name. Throws ConfigError for unknown names.
Scenario builtin_scenario(const std::string& name);

/// A built-in name, or else a path to a JSON config file.
Scenario load_scenario(const std::string& name_or_path);

std::string kappa_rule_name(KappaRule rule);
KappaRule parse_kappa_rule(const std::string& text);

/// JSON text with sections drift, cost, noise, sim and policy. Matrices are
/// row-major nested arrays. Doubles are written in shortest round-trip form.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace lqts
