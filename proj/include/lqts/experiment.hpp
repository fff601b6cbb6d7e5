#pragma once

#include "lqts/metrics.hpp"
#include "lqts/policies.hpp"
#include "lqts/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lqts {

// Seeding: replication r uses seed = base_seed + r. The Wiener increments
// come from stream kNoise of that seed and every policy randomization from
// stream kPolicy, so all policies of one replication see the same noise.

struct SweepConfig {
  Scenario scenario;
  std::vector<double> taus;
  int reps = 100;
  std::uint64_t base_seed = 1;
  int threads = 1;
};

struct SweepRow {
  double tau = 0.0;
  int reps = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::uint64_t seed = 0;  // base seed of the row
};

/// Stabilization phase over [0, tau] for every tau and replication, each
/// classified with check_failure_event.
std::vector<SweepRow> run_stabilization_sweep(const SweepConfig& config);

/// tau-grid "a:b:step", inclusive of b when it lies on the grid.
std::vector<double> parse_tau_grid(const std::string& text);

enum class PolicyKind { kThompson, kRandomizedEstimate, kOptimal };

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& text);

struct RegretConfig {
  Scenario scenario;
  std::vector<PolicyKind> policies{PolicyKind::kThompson};
  double horizon = 600.0;
  int reps = 100;
  std::uint64_t base_seed = 1;
  std::vector<double> checkpoints;  // empty means default_checkpoints(horizon)
  int threads = 1;
  LearningOptions options;  // dither is taken from the scenario
};

/// One ExperimentResult per (policy, replication), policy-major and in
/// replication order within each policy.
struct RegretOutput {
  std::vector<PolicyKind> policies;
  int reps = 0;
  std::vector<ExperimentResult> results;

  const ExperimentResult& at(std::size_t policy_index, int rep) const {
    return results[policy_index * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)];
  }
  std::vector<ExperimentResult> for_policy(std::size_t policy_index) const;
};

RegretOutput run_regret_experiment(const RegretConfig& config);

/// Decimal text with 17 significant digits. Throws ValidationError for
/// non-finite values.
std::string format_number(double value);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Per-replication rows followed by the "mean" and "worst" aggregate rows of
/// every policy (the aggregates carry the label in the rep column).
void write_regret_csv(const RegretOutput& output, std::ostream& out);

}  // namespace lqts
