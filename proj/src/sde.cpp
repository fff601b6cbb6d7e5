#include "lqts/sde.hpp"

#include "lqts/riccati.hpp"

#include <cmath>
#include <sstream>

namespace lqts {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6c71u};
  return Rng(seq);
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

Matrix sample_wiener_increments(const NoiseSpec& noise, double dt, Index n, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (n < 1) throw ConfigError("need at least one increment");
  const Matrix L = noise.cholesky_factor();
  Matrix z = standard_normal(noise.p(), n, rng);
  Matrix out = L.triangularView<Eigen::Lower>() * z;
  out *= std::sqrt(dt);
  return out;
}

Vector euler_step(const Vector& x, const Vector& u, const DriftParams& drift,
                  const Vector& dW, double dt) {
  if (x.size() != drift.p() || dW.size() != drift.p() || u.size() != drift.q()) {
    throw ShapeError("euler_step: state, action or increment has the wrong length");
  }
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  return x + (drift.A * x + drift.B * u) * dt + dW;
}

Index steps_for_horizon(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) {
    throw ConfigError("horizon and time step must be positive");
  }
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio) || n < 1) {
    std::ostringstream os;
    os << "horizon " << horizon << " is not a whole number of steps of " << dt;
    throw ConfigError(os.str());
  }
  return static_cast<Index>(n);
}

DitherSignal DitherSignal::gaussian(Index q, double sigma, Index segments, double length,
                                    double dt, Rng& rng) {
  if (segments < 1) throw ConfigError("dither needs at least one segment");
  if (!(sigma >= 0.0)) throw ConfigError("dither amplitude must be non-negative");
  const double seg = length / static_cast<double>(segments);
  if (seg < dt * (1.0 - 1e-12)) {
    throw ConfigError("dither segments are shorter than one time step");
  }
  DitherSignal d;
  d.starts.resize(static_cast<std::size_t>(segments));
  for (Index i = 0; i < segments; ++i) {
    d.starts[static_cast<std::size_t>(i)] =
        static_cast<Index>(std::llround(static_cast<double>(i) * seg / dt));
  }
  d.values = sigma * standard_normal(q, segments, rng);
  d.validate(q);
  return d;
}

void DitherSignal::validate(Index q) const {
  if (starts.empty() || starts.front() != 0) {
    throw ConfigError("dither segments must start at step 0");
  }
  for (std::size_t i = 1; i < starts.size(); ++i) {
    if (starts[i] <= starts[i - 1]) throw ConfigError("dither segments are not increasing");
  }
  if (values.rows() != q || values.cols() != segments()) {
    throw ShapeError("dither levels must be q x segments");
  }
}

TrajectoryLog::TrajectoryLog(double dt, Matrix states, Matrix actions, Matrix increments,
                             Vector running_cost)
    : dt_(dt),
      states_(std::move(states)),
      actions_(std::move(actions)),
      increments_(std::move(increments)),
      running_cost_(std::move(running_cost)) {
  const Index n = actions_.cols();
  if (states_.cols() != n + 1 || increments_.cols() != n || running_cost_.size() != n ||
      increments_.rows() != states_.rows()) {
    throw ShapeError("trajectory log arrays are inconsistent");
  }
}

Plant::Plant(const DriftParams& truth, const CostSpec& cost, const Matrix& increments,
             double dt, Index steps, const Vector& x0, bool record_log, StepObserver* observer)
    : truth_(truth),
      cost_(cost),
      increments_(increments),
      dt_(dt),
      n_(steps),
      record_(record_log),
      observer_(observer),
      x_(x0.size() == 0 ? Vector::Zero(truth.p()) : x0),
      drift_term_(truth.p()),
      running_(steps) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (x_.size() != truth.p()) throw ShapeError("initial state must have length p");
  if (cost.p() != truth.p() || cost.q() != truth.q()) {
    throw ShapeError("cost dimensions do not match the drift");
  }
  if (increments.rows() != truth.p() || increments.cols() < steps) {
    throw ConfigError("increment sequence is shorter than the horizon");
  }
  if (record_) {
    states_.resize(truth.p(), steps + 1);
    actions_.resize(truth.q(), steps);
    states_.col(0) = x_;
  }
}

void Plant::apply(const Vector& u) {
  if (k_ >= n_) throw ConfigError("plant horizon exhausted");
  acc_ += cost_.stage_cost(x_, u) * dt_;
  running_(k_) = acc_;
  if (record_) actions_.col(k_) = u;
  if (observer_ != nullptr) observer_->on_step(k_, x_, u, increments_.col(k_));
  drift_term_.noalias() = truth_.A * x_;
  drift_term_.noalias() += truth_.B * u;
  x_ += drift_term_ * dt_ + increments_.col(k_);
  ++k_;
  if (record_) states_.col(k_) = x_;
}

TrajectoryLog Plant::take_log() {
  if (!record_) throw ConfigError("plant was not recording");
  if (!done()) throw ConfigError("plant has not reached the horizon");
  return TrajectoryLog(dt_, std::move(states_), std::move(actions_), increments_.leftCols(n_),
                       running_);
}

TrajectoryLog simulate_feedback(const DriftParams& drift, const NoiseSpec& noise,
                                const CostSpec& cost, const Matrix& gain,
                                const std::optional<DitherSignal>& dither, const Vector& x0,
                                double horizon, double dt, const Matrix& increments) {
  drift.validate();
  const Index p = drift.p();
  const Index q = drift.q();
  if (noise.p() != p) throw ShapeError("noise dimension does not match the drift");
  if (gain.rows() != q || gain.cols() != p) throw ShapeError("gain must be q x p");
  if (x0.size() != p) throw ShapeError("initial state must have length p");
  const Index n = steps_for_horizon(horizon, dt);
  if (dither) dither->validate(q);

  Plant plant(drift, cost, increments, dt, n, x0, /*record_log=*/true);
  Vector u(q);
  std::size_t seg = 0;
  for (Index k = 0; k < n; ++k) {
    u.noalias() = gain * plant.state();
    if (dither) {
      while (seg + 1 < dither->starts.size() && dither->starts[seg + 1] <= k) ++seg;
      u += dither->values.col(static_cast<Index>(seg));
    }
    plant.apply(u);
  }
  return plant.take_log();
}

Matrix ou_stationary_covariance(const Matrix& D, const Matrix& C) {
  return solve_lyapunov(D.transpose(), C);
}

}  // namespace lqts
