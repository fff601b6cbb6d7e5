#pragma once

#include "lqts/sde.hpp"
#include "lqts/types.hpp"

#include <optional>

namespace lqts {

/// Matrix-normal belief over theta = [A, B]^T. Every column of theta is an
/// independent Gaussian with mean the matching column of mu and covariance
/// precision^{-1}.
class PosteriorState {
 public:
  PosteriorState() = default;

  Index p() const { return p_; }
  Index q() const { return q_; }
  const Matrix& precision() const { return precision_; }
  const Matrix& cross_moment() const { return cross_moment_; }
  const Matrix& prior_precision() const { return prior_precision_; }
  const Matrix& prior_mean() const { return prior_mean_; }
  double elapsed() const { return elapsed_; }

  /// precision += z z^T dt, cross_moment += z dx^T, elapsed += dt.
  /// The Ito integrals are left-endpoint sums: z must be the observation at
  /// the start of the step and dx the increment over it.
  void accumulate(const Vector& z, const Vector& dx, double dt);

  /// Adds steps [begin, end) of a trajectory log, with z_k = [x_k; u_k] and
  /// dx_k = x_{k+1} - x_k.
  void accumulate(const TrajectoryLog& log, Index begin, Index end);

  friend PosteriorState init_prior(Index p, Index q, const std::optional<Matrix>& prior_mean,
                                   const std::optional<Matrix>& prior_precision);

 private:
  Index p_ = 0;
  Index q_ = 0;
  Matrix precision_;
  Matrix cross_moment_;
  Matrix prior_precision_;
  Matrix prior_mean_;
  double elapsed_ = 0.0;
};

/// Defaults: mean 0_{(p+q) x p}, precision I_{p+q}.
PosteriorState init_prior(Index p, Index q, const std::optional<Matrix>& prior_mean = {},
                          const std::optional<Matrix>& prior_precision = {});

/// Value-returning form of PosteriorState::accumulate.
PosteriorState accumulate(PosteriorState state, const Vector& z, const Vector& dx, double dt);

struct PosteriorMoments {
  Matrix mean;       // (p+q) x p
  Matrix precision;  // (p+q) x (p+q)
};

inline constexpr double kMaxPrecisionCondition = 1e14;

/// Mean by Cholesky solve of precision * mean = cross_moment. Throws
/// ConditioningError when cond(precision) exceeds kMaxPrecisionCondition.
PosteriorMoments posterior_mean_cov(const PosteriorState& state);

/// mean + L^{-T} Z with L L^T = precision and Z i.i.d. standard normal.
Matrix sample_posterior(const PosteriorState& state, Rng& rng);

/// Spectral norm of theta_hat - theta_0.
double estimation_error(const Matrix& theta_hat, const Matrix& theta_0);

double log_det_spd(const Matrix& m);

}  // namespace lqts
