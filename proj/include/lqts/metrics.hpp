#pragma once

#include "lqts/policies.hpp"
#include "lqts/posterior.hpp"
#include "lqts/sde.hpp"
#include "lqts/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lqts {

/// Pathwise regret sum_k (z_k^T Q z_k - z*_k^T Q z*_k) dt at each checkpoint.
/// Both logs must share the grid and the exact increment sequence.
std::vector<std::pair<double, double>> regret(const TrajectoryLog& policy_log,
                                              const TrajectoryLog& optimal_log,
                                              const std::vector<double>& checkpoints);

/// Same quantity from the cumulative cost vectors of two runs on shared
/// increments.
std::vector<double> regret_from_costs(const Vector& policy_cost, const Vector& optimal_cost,
                                      double dt, const std::vector<double>& checkpoints);

/// Cumulative cost over [0, t] read off a running-cost vector.
double cost_until(const Vector& running_cost, double dt, double t);

/// R / (p (p+q) sqrt(T) ln T). Throws std::domain_error for T <= 1.
double normalize_regret(double regret, double horizon, Index p, Index q);

/// err^2 / (p (p+q) tau^{-1/2} ln tau). Throws std::domain_error for tau <= 1.
double normalize_estimation_error(double error_sq, double tau, Index p, Index q);

struct SelfNormalized {
  double stat = 0.0;    // lambda_max(M^T Sigma^{-1} M)
  double budget = 0.0;  // p lambda_max(C) (log det Sigma - log det Sigma_0)
};

/// M is the accumulated integral of z dW^T, (p+q) x p.
SelfNormalized self_normalized_stat(const PosteriorState& posterior, const Matrix& noise_product,
                                    const NoiseSpec& noise);

/// ||u + Qu^{-1} B0^T K(theta_0) x||^2 for one step.
double action_deviation(const Vector& x, const Vector& u, const Matrix& optimal_gain);

/// Riemann sum of the squared action deviation from the optimal feedback
/// over t >= from_time.
double action_deviation_integral(const TrajectoryLog& policy_log, const DriftParams& truth,
                                 const CostSpec& cost, double from_time);

/// {25, 50, 100, 150, ..., horizon}, clipped to (0, horizon].
std::vector<double> default_checkpoints(double horizon);

/// Oracle-side monitor: accumulates the noise cross-product M and the action
/// deviation integral while a run is simulated, and evaluates the
/// self-normalized statistic at every episode start.
class OracleMonitor : public RunObserver {
 public:
  OracleMonitor(const DriftParams& truth, const CostSpec& cost, const NoiseSpec& noise,
                double dt, double deviation_from);

  void on_step(Index k, const Vector& x, const Vector& u, const Vector& dW) override;
  void on_episode(const EpisodeRecord& record, const PosteriorState& posterior) override;

  /// Cumulative action deviation after each step.
  const std::vector<double>& deviation() const { return deviation_; }
  const std::vector<SelfNormalized>& self_normalized() const { return self_normalized_; }
  const Matrix& noise_product() const { return noise_product_; }

 private:
  const NoiseSpec& noise_;
  Matrix optimal_gain_;
  double dt_;
  Index from_step_;
  double deviation_acc_ = 0.0;
  std::vector<double> deviation_;
  Matrix noise_product_;
  Vector z_;
  std::vector<SelfNormalized> self_normalized_;
};

struct Checkpoint {
  double time = 0.0;
  double regret = 0.0;
  double normalized_regret = 0.0;
  double est_err_sq = 0.0;
  double normalized_est_err = 0.0;
  double action_deviation = 0.0;
};

struct EpisodeSummary {
  int index = 0;
  double start = 0.0;
  double est_err_sq = 0.0;
  double normalized_est_err = 0.0;
  int redraws = 0;
  SelfNormalized self_normalized;
};

struct ExperimentResult {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  std::vector<EpisodeRecord> episodes;
  std::vector<EpisodeSummary> episode_summaries;
  bool failed = false;
  std::string failure_reason;
  double wall_seconds = 0.0;
};

/// Combines a learning run with the optimal run on the same increments.
/// monitor may be null; when given it must have observed policy_run.
ExperimentResult summarize(const PolicyRun& policy_run, const PolicyRun& optimal_run,
                           const DriftParams& truth, const std::vector<double>& checkpoints,
                           const OracleMonitor* monitor = nullptr);

/// Per-checkpoint mean and per-time-point maximum across replications.
struct Aggregate {
  std::vector<Checkpoint> mean;
  std::vector<Checkpoint> worst;
};
Aggregate aggregate(const std::vector<ExperimentResult>& results);

/// Spearman rank correlation (average ranks for ties).
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace lqts
