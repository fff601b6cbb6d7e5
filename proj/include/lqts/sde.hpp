#pragma once

#include "lqts/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace lqts {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams separate the noise
/// realization from policy randomness so that compared policies can share
/// the former.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

namespace stream {
inline constexpr std::uint64_t kNoise = 0;
inline constexpr std::uint64_t kPolicy = 1;
}  // namespace stream

/// Fills a matrix with i.i.d. standard normals, column by column.
Matrix standard_normal(Index rows, Index cols, Rng& rng);

/// n increments of a Wiener process with covariance C over steps of length
/// dt, one per column (p x n). Each column is N(0, dt C).
Matrix sample_wiener_increments(const NoiseSpec& noise, double dt, Index n, Rng& rng);

/// x + (A x + B u) dt + dW.
Vector euler_step(const Vector& x, const Vector& u, const DriftParams& drift,
                  const Vector& dW, double dt);

/// Number of grid steps covering [0, horizon]; throws ConfigError unless the
/// horizon is a whole number of steps (relative slack 1e-9).
Index steps_for_horizon(double horizon, double dt);

/// Piecewise-constant excitation. Segment i is active on grid steps
/// [starts[i], starts[i+1]) and the last segment runs to the end.
struct DitherSignal {
  std::vector<Index> starts;
  Matrix values;  // q x segments

  /// Splits `length` seconds into `segments` equal pieces snapped to the
  /// grid and draws each level from N(0, sigma^2 I_q). Throws ConfigError
  /// when a piece is shorter than one step.
  static DitherSignal gaussian(Index q, double sigma, Index segments, double length,
                               double dt, Rng& rng);

  Index segments() const { return static_cast<Index>(starts.size()); }
  void validate(Index q) const;
};

/// Immutable record of a simulated run on the grid t_k = k dt.
class TrajectoryLog {
 public:
  TrajectoryLog() = default;
  /// states: p x (n+1); actions: q x n; increments: p x n; running_cost: n
  /// where running_cost(k) is the cost accumulated over [0, (k+1) dt].
  TrajectoryLog(double dt, Matrix states, Matrix actions, Matrix increments,
                Vector running_cost);

  double step() const { return dt_; }
  Index steps() const { return actions_.cols(); }
  double horizon() const { return static_cast<double>(steps()) * dt_; }
  const Matrix& states() const { return states_; }
  const Matrix& actions() const { return actions_; }
  const Matrix& noise_increments() const { return increments_; }
  const Vector& running_cost() const { return running_cost_; }

 private:
  double dt_ = 0.0;
  Matrix states_;
  Matrix actions_;
  Matrix increments_;
  Vector running_cost_;
};

/// Receives every simulated step. dW is the true increment, so observers
/// are oracle-side only.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(Index /*k*/, const Vector& /*x*/, const Vector& /*u*/,
                       const Vector& /*dW*/) {}
};

/// Truth-side simulator on a fixed grid and a fixed increment sequence.
class Plant {
 public:
  Plant(const DriftParams& truth, const CostSpec& cost, const Matrix& increments, double dt,
        Index steps, const Vector& x0, bool record_log, StepObserver* observer = nullptr);

  const Vector& state() const { return x_; }
  Index step_index() const { return k_; }
  Index steps() const { return n_; }
  double dt() const { return dt_; }
  bool done() const { return k_ >= n_; }

  /// Applies u on [k dt, (k+1) dt) and advances the state.
  void apply(const Vector& u);

  const Vector& running_cost() const { return running_; }
  /// Requires record_log. Valid once done().
  TrajectoryLog take_log();

 private:
  const DriftParams& truth_;
  const CostSpec& cost_;
  const Matrix& increments_;
  double dt_;
  Index n_;
  Index k_ = 0;
  bool record_;
  StepObserver* observer_;
  Vector x_;
  Vector drift_term_;
  double acc_ = 0.0;
  Vector running_;
  Matrix states_;
  Matrix actions_;
};

/// Simulates u_k = gain x_k + v(k dt) on the supplied increments (common
/// random numbers). Requires increments.cols() >= steps_for_horizon(T, dt).
TrajectoryLog simulate_feedback(const DriftParams& drift, const NoiseSpec& noise,
                                const CostSpec& cost, const Matrix& gain,
                                const std::optional<DitherSignal>& dither, const Vector& x0,
                                double horizon, double dt, const Matrix& increments);

/// Stationary covariance P of dx = D x dt + dW with Cov(dW) = C dt, i.e. the
/// solution of D P + P D^T + C = 0.
Matrix ou_stationary_covariance(const Matrix& D, const Matrix& C);

}  // namespace lqts
