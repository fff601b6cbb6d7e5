#pragma once

#include "lqts/posterior.hpp"
#include "lqts/riccati.hpp"
#include "lqts/sde.hpp"
#include "lqts/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lqts {

/// Episode end points tau_0 < tau_1 < ... with
/// growth_lo <= (tau_{n+1} - tau_n) / tau_n <= growth_hi.
class EpisodeSchedule {
 public:
  /// Geometric schedule tau_n = tau0 (1 + growth)^n.
  EpisodeSchedule(double tau0, double growth);
  /// Explicit end points, checked against the growth bounds.
  EpisodeSchedule(std::vector<double> ends, double growth_lo, double growth_hi);

  double tau0() const { return tau0_; }
  double growth_lo() const { return lo_; }
  double growth_hi() const { return hi_; }

  /// All tau_n <= horizon, in order.
  std::vector<double> ends_until(double horizon) const;

 private:
  double tau0_;
  double lo_;
  double hi_;
  std::vector<double> explicit_;
};

enum class KappaRule { kPow1_5, kPow2, kFixed };

struct DitherSpec {
  double sigma = 5.0;
  KappaRule rule = KappaRule::kPow1_5;
  Index fixed_segments = 1;

  /// Segment count for a stabilization phase of length tau.
  Index segments(double tau) const;
  /// Whether kappa >= tau^2, the segment count the stabilization guarantee
  /// asks for. The default rule uses fewer; callers surface a warning.
  bool meets_segment_condition(double tau) const;
};

/// Appends what the policy did during one episode.
struct EpisodeRecord {
  int index = 0;
  double start = 0.0;  // tau_n
  double end = 0.0;    // tau_{n+1} (or the horizon)
  Matrix theta_hat;    // (p+q) x p
  Matrix gain;         // q x p
  int redraws = 0;
};

/// Oracle-side hooks. Policies never read anything back from an observer.
class RunObserver : public StepObserver {
 public:
  virtual void on_episode(const EpisodeRecord& /*record*/, const PosteriorState& /*posterior*/) {}
};

struct StabilizationResult {
  Matrix theta_hat;
  PosteriorState posterior;
  TrajectoryLog log;
};

/// Feedback G_init plus piecewise-constant Gaussian dither over [0, tau],
/// posterior accumulation and one posterior draw. Throws ConfigError when
/// G_init does not stabilize the truth or the dither does not fit the grid.
StabilizationResult run_stabilization(const DriftParams& truth, const NoiseSpec& noise,
                                      const CostSpec& cost, const Matrix& initial_gain,
                                      double tau, const DitherSpec& dither, double dt,
                                      const Matrix& increments, Rng& rng);

/// True iff A0 - B0 Qu^{-1} B_hat^T K(theta_hat) has an eigenvalue with
/// non-negative real part, or no CARE solution exists for theta_hat.
bool check_failure_event(const Matrix& theta_hat, const DriftParams& truth,
                         const CostSpec& cost);

struct ResamplePolicy {
  double blowup_factor = 1e3;  // ||x|| > factor (1 + ||x_ref||) aborts the episode
  int max_redraws = 10;
};

struct LearningOptions {
  ResamplePolicy resample;
  DitherSpec dither;
  /// Replace every posterior draw (and the stabilization phase) with this
  /// parameter. Used to check the exact-knowledge limit.
  std::optional<Matrix> injected_theta;
  bool record_log = false;
  Vector x0;  // empty means zero

  // Randomized-estimate baseline: exploration noise with per-coordinate
  // standard deviation sigma * t^{-decay} added to the actions after tau_0,
  // redrawn every exploration_hold seconds (0 redraws every step).
  std::optional<double> exploration_sigma;  // defaults to dither.sigma
  double exploration_decay = 0.25;
  std::optional<double> exploration_hold;  // defaults to the dither segment length
};

struct PolicyRun {
  std::string policy;
  double dt = 0.0;
  Vector running_cost;  // cumulative, one entry per step
  std::vector<EpisodeRecord> episodes;
  std::optional<TrajectoryLog> log;
  bool failed = false;
  std::string failure_reason;
};

/// Episodic Thompson sampling: stabilization over [0, tau_0], then at each
/// tau_n the optimal gain of a fresh posterior draw.
PolicyRun run_thompson_sampling(const DriftParams& truth, const NoiseSpec& noise,
                                const CostSpec& cost, const Matrix& initial_gain,
                                const EpisodeSchedule& schedule, double horizon, double dt,
                                const Matrix& increments, Rng& rng,
                                const LearningOptions& options = {},
                                RunObserver* observer = nullptr);

/// Certainty-equivalent baseline: same skeleton, gain from the posterior
/// mean, plus decaying exploration noise on the actions.
PolicyRun run_randomized_estimate(const DriftParams& truth, const NoiseSpec& noise,
                                  const CostSpec& cost, const Matrix& initial_gain,
                                  const EpisodeSchedule& schedule, double horizon, double dt,
                                  const Matrix& increments, Rng& rng,
                                  const LearningOptions& options = {},
                                  RunObserver* observer = nullptr);

/// u = -Qu^{-1} B0^T K(theta_0) x on the supplied increments.
TrajectoryLog run_optimal(const DriftParams& truth, const NoiseSpec& noise, const CostSpec& cost,
                          double horizon, double dt, const Matrix& increments,
                          const Vector& x0 = {});

/// Same as run_optimal without keeping the full log.
PolicyRun run_optimal_trace(const DriftParams& truth, const NoiseSpec& noise,
                            const CostSpec& cost, double horizon, double dt,
                            const Matrix& increments, RunObserver* observer = nullptr,
                            const Vector& x0 = {});

/// Samples random gains with i.i.d. N(0, scale^2) entries and returns the
/// first one that stabilizes the truth.
Matrix find_random_stabilizer(const DriftParams& truth, Rng& rng, double scale,
                              int max_attempts = 100000);

}  // namespace lqts
