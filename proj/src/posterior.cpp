#include "lqts/posterior.hpp"

#include "lqts/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace lqts {

PosteriorState init_prior(Index p, Index q, const std::optional<Matrix>& prior_mean,
                          const std::optional<Matrix>& prior_precision) {
  if (p < 1 || q < 1) throw ShapeError("posterior dimensions must be positive");
  const Index d = p + q;
  PosteriorState s;
  s.p_ = p;
  s.q_ = q;
  s.prior_mean_ = prior_mean.value_or(Matrix::Zero(d, p));
  s.prior_precision_ = prior_precision.value_or(Matrix::Identity(d, d));
  if (s.prior_mean_.rows() != d || s.prior_mean_.cols() != p) {
    throw ShapeError("prior mean must be (p+q) x p");
  }
  require_spd(s.prior_precision_, "prior precision");
  s.precision_ = s.prior_precision_;
  s.cross_moment_ = s.prior_precision_ * s.prior_mean_;
  return s;
}

void PosteriorState::accumulate(const Vector& z, const Vector& dx, double dt) {
  if (z.size() != p_ + q_ || dx.size() != p_) {
    throw ShapeError("posterior update: observation or increment has the wrong length");
  }
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  precision_.noalias() += (dt * z) * z.transpose();
  cross_moment_.noalias() += z * dx.transpose();
  elapsed_ += dt;
}

void PosteriorState::accumulate(const TrajectoryLog& log, Index begin, Index end) {
  if (begin < 0 || end > log.steps() || begin > end) {
    throw ShapeError("posterior update: step range outside the log");
  }
  if (log.states().rows() != p_ || log.actions().rows() != q_) {
    throw ShapeError("posterior update: log dimensions do not match");
  }
  Vector z(p_ + q_);
  Vector dx(p_);
  for (Index k = begin; k < end; ++k) {
    z.head(p_) = log.states().col(k);
    z.tail(q_) = log.actions().col(k);
    dx = log.states().col(k + 1) - log.states().col(k);
    accumulate(z, dx, log.step());
  }
}

PosteriorState accumulate(PosteriorState state, const Vector& z, const Vector& dx, double dt) {
  state.accumulate(z, dx, dt);
  return state;
}

PosteriorMoments posterior_mean_cov(const PosteriorState& state) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(state.precision(), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxPrecisionCondition) {
    std::ostringstream os;
    os << "posterior precision is numerically singular (condition " << hi / lo << ")";
    throw ConditioningError(os.str());
  }
  Eigen::LLT<Matrix> llt(state.precision());
  if (llt.info() != Eigen::Success) {
    throw ConditioningError("posterior precision has no Cholesky factor");
  }
  return {llt.solve(state.cross_moment()), state.precision()};
}

Matrix sample_posterior(const PosteriorState& state, Rng& rng) {
  const PosteriorMoments m = posterior_mean_cov(state);
  Eigen::LLT<Matrix> llt(m.precision);
  Matrix z = standard_normal(m.mean.rows(), m.mean.cols(), rng);
  return m.mean + llt.matrixU().solve(z);
}

double estimation_error(const Matrix& theta_hat, const Matrix& theta_0) {
  if (theta_hat.rows() != theta_0.rows() || theta_hat.cols() != theta_0.cols()) {
    throw ShapeError("estimation_error: parameter shapes differ");
  }
  return spectral_norm(theta_hat - theta_0);
}

double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw ConditioningError("log_det_spd: matrix is not SPD");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace lqts
