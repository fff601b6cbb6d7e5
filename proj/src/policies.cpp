#include "lqts/policies.hpp"

#include "lqts/linalg.hpp"

#include <cmath>
#include <sstream>

namespace lqts {

namespace {

Index grid_index(double t, double dt) { return static_cast<Index>(std::llround(t / dt)); }

void require_stabilizer(const DriftParams& truth, const Matrix& gain) {
  if (gain.rows() != truth.q() || gain.cols() != truth.p()) {
    throw ShapeError("initial gain must be q x p");
  }
  if (!is_hurwitz(truth.A + truth.B * gain)) {
    throw ConfigError("initial gain does not stabilize the true system");
  }
}

void check_dimensions(const DriftParams& truth, const NoiseSpec& noise, const CostSpec& cost) {
  truth.validate();
  if (noise.p() != truth.p() || cost.p() != truth.p() || cost.q() != truth.q()) {
    throw ShapeError("noise/cost dimensions do not match the drift");
  }
}

// Runs the dithered initial feedback over steps [0, steps) of the plant,
// accumulating the posterior.
void dithered_phase(Plant& plant, PosteriorState& posterior, const Matrix& gain,
                    const DitherSignal& dither, Index steps) {
  const Index p = gain.cols();
  const Index q = gain.rows();
  Vector u(q);
  Vector z(p + q);
  Vector x_prev(p);
  std::size_t seg = 0;
  for (Index k = 0; k < steps; ++k) {
    while (seg + 1 < dither.starts.size() && dither.starts[seg + 1] <= k) ++seg;
    u.noalias() = gain * plant.state();
    u += dither.values.col(static_cast<Index>(seg));
    x_prev = plant.state();
    z.head(p) = x_prev;
    z.tail(q) = u;
    plant.apply(u);
    posterior.accumulate(z, plant.state() - x_prev, plant.dt());
  }
}

enum class Estimator { kPosteriorSample, kPosteriorMean };

PolicyRun run_learning(const std::string& name, Estimator estimator, bool explore,
                       const DriftParams& truth, const NoiseSpec& noise, const CostSpec& cost,
                       const Matrix& initial_gain, const EpisodeSchedule& schedule,
                       double horizon, double dt, const Matrix& increments, Rng& rng,
                       const LearningOptions& options, RunObserver* observer) {
  check_dimensions(truth, noise, cost);
  const Index p = truth.p();
  const Index q = truth.q();
  const Index n = steps_for_horizon(horizon, dt);
  const double tau0 = schedule.tau0();
  if (horizon < tau0) throw ConfigError("horizon must be at least tau_0");
  require_stabilizer(truth, initial_gain);

  std::optional<Matrix> injected_gain;
  if (options.injected_theta) {
    injected_gain =
        solve_care(DriftParams::from_stacked(*options.injected_theta, p, q), cost).gain;
  }

  PolicyRun run;
  run.policy = name;
  run.dt = dt;

  Plant plant(truth, cost, increments, dt, n, options.x0, options.record_log, observer);
  PosteriorState posterior = init_prior(p, q);

  Vector u(q);
  Vector z(p + q);
  Vector x_prev(p);
  auto step = [&](const Vector& action) {
    x_prev = plant.state();
    z.head(p) = x_prev;
    z.tail(q) = action;
    plant.apply(action);
    posterior.accumulate(z, plant.state() - x_prev, dt);
  };

  const Index tau0_steps = std::min(n, grid_index(tau0, dt));
  if (injected_gain) {
    for (Index k = 0; k < tau0_steps; ++k) {
      u.noalias() = *injected_gain * plant.state();
      step(u);
    }
  } else {
    const DitherSignal dither = DitherSignal::gaussian(
        q, options.dither.sigma, options.dither.segments(tau0), tau0, dt, rng);
    dithered_phase(plant, posterior, initial_gain, dither, tau0_steps);
  }

  const double explore_sigma = options.exploration_sigma.value_or(options.dither.sigma);
  const double hold = options.exploration_hold.value_or(
      tau0 / static_cast<double>(options.dither.segments(tau0)));
  const Index hold_steps = std::max<Index>(1, grid_index(hold, dt));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector exploration = Vector::Zero(q);
  double ref_norm = plant.state().norm();

  // Draws a parameter for the episode from the posterior as it stood at the
  // episode start, together with its optimal gain. Returns false when the
  // redraw budget runs out.
  auto draw = [&](const PosteriorState& snapshot, bool first, EpisodeRecord& rec) {
    for (;;) {
      Matrix theta;
      if (options.injected_theta) {
        theta = *options.injected_theta;
      } else if (estimator == Estimator::kPosteriorMean && first) {
        theta = posterior_mean_cov(snapshot).mean;
      } else {
        theta = sample_posterior(snapshot, rng);
      }
      try {
        rec.gain = solve_care(DriftParams::from_stacked(theta, p, q), cost).gain;
        rec.theta_hat = std::move(theta);
        return true;
      } catch (const std::runtime_error&) {
        // Non-stabilizable draw; counts against the same redraw budget.
      }
      first = false;
      if (++rec.redraws > options.resample.max_redraws) return false;
    }
  };

  const std::vector<double> ends = schedule.ends_until(horizon);
  Matrix fallback_gain = initial_gain;
  bool failed = false;
  for (std::size_t i = 0; i < ends.size() && !failed; ++i) {
    const Index begin = grid_index(ends[i], dt);
    const Index end = (i + 1 < ends.size()) ? grid_index(ends[i + 1], dt) : n;
    if (begin >= n) break;

    EpisodeRecord rec;
    rec.index = static_cast<int>(i);
    rec.start = ends[i];
    rec.end = (i + 1 < ends.size()) ? ends[i + 1] : horizon;
    const PosteriorState snapshot = posterior;
    if (!draw(snapshot, true, rec)) {
      failed = true;
      run.failure_reason = "no stabilizable posterior draw at episode " + std::to_string(i);
      run.episodes.push_back(rec);
      break;
    }
    if (observer != nullptr) observer->on_episode(rec, snapshot);

    for (Index k = plant.step_index(); k < end; ++k) {
      u.noalias() = rec.gain * plant.state();
      if (explore && explore_sigma > 0.0) {
        if ((k - tau0_steps) % hold_steps == 0) {
          const double amp = explore_sigma * std::pow(static_cast<double>(k) * dt,
                                                      -options.exploration_decay);
          for (Index j = 0; j < q; ++j) exploration(j) = amp * normal(rng);
        }
        u += exploration;
      }
      step(u);
      if (plant.state().norm() > options.resample.blowup_factor * (1.0 + ref_norm)) {
        ref_norm = std::max(ref_norm, plant.state().norm());
        ++rec.redraws;
        if (rec.redraws > options.resample.max_redraws || !draw(snapshot, false, rec)) {
          failed = true;
          run.failure_reason = "state blew up at t=" + std::to_string((k + 1) * dt) +
                               " and the redraw budget ran out";
          break;
        }
        if (observer != nullptr) observer->on_episode(rec, snapshot);
      }
    }
    run.episodes.push_back(rec);
  }

  if (failed) {
    // The conservative initial feedback carries the run to the horizon.
    run.failed = true;
    while (!plant.done()) {
      u.noalias() = fallback_gain * plant.state();
      step(u);
    }
  }
  run.running_cost = plant.running_cost();
  if (options.record_log) run.log = plant.take_log();
  return run;
}

}  // namespace

EpisodeSchedule::EpisodeSchedule(double tau0, double growth)
    : tau0_(tau0), lo_(growth), hi_(growth) {
  if (!(tau0 > 0.0)) throw ConfigError("tau_0 must be positive");
  if (!(growth > 0.0) || !std::isfinite(growth)) {
    throw ConfigError("episode growth must be positive and finite");
  }
}

EpisodeSchedule::EpisodeSchedule(std::vector<double> ends, double growth_lo, double growth_hi)
    : tau0_(ends.empty() ? 0.0 : ends.front()),
      lo_(growth_lo),
      hi_(growth_hi),
      explicit_(std::move(ends)) {
  if (explicit_.empty() || !(tau0_ > 0.0)) throw ConfigError("schedule needs tau_0 > 0");
  if (!(growth_lo > 0.0) || !(growth_lo <= growth_hi) || !std::isfinite(growth_hi)) {
    throw ConfigError("need 0 < growth_lo <= growth_hi < inf");
  }
  for (std::size_t i = 1; i < explicit_.size(); ++i) {
    const double rel = (explicit_[i] - explicit_[i - 1]) / explicit_[i - 1];
    if (rel < growth_lo * (1 - 1e-12) || rel > growth_hi * (1 + 1e-12)) {
      std::ostringstream os;
      os << "episode " << i << " grows by " << rel << ", outside [" << growth_lo << ", "
         << growth_hi << "]";
      throw ConfigError(os.str());
    }
  }
}

std::vector<double> EpisodeSchedule::ends_until(double horizon) const {
  std::vector<double> out;
  if (!explicit_.empty()) {
    for (double t : explicit_) {
      if (t > horizon) break;
      out.push_back(t);
    }
    return out;
  }
  for (int n = 0;; ++n) {
    const double t = tau0_ * std::pow(1.0 + hi_, n);
    if (t > horizon) break;
    out.push_back(t);
  }
  return out;
}

Index DitherSpec::segments(double tau) const {
  switch (rule) {
    case KappaRule::kPow1_5:
      return std::max<Index>(1, static_cast<Index>(std::floor(std::pow(tau, 1.5))));
    case KappaRule::kPow2:
      return std::max<Index>(1, static_cast<Index>(std::floor(tau * tau)));
    case KappaRule::kFixed:
      break;
  }
  if (fixed_segments < 1) throw ConfigError("dither needs at least one segment");
  return fixed_segments;
}

bool DitherSpec::meets_segment_condition(double tau) const {
  return static_cast<double>(segments(tau)) >= tau * tau;
}

StabilizationResult run_stabilization(const DriftParams& truth, const NoiseSpec& noise,
                                      const CostSpec& cost, const Matrix& initial_gain,
                                      double tau, const DitherSpec& dither, double dt,
                                      const Matrix& increments, Rng& rng) {
  check_dimensions(truth, noise, cost);
  require_stabilizer(truth, initial_gain);
  const Index n = steps_for_horizon(tau, dt);
  const DitherSignal signal =
      DitherSignal::gaussian(truth.q(), dither.sigma, dither.segments(tau), tau, dt, rng);

  Plant plant(truth, cost, increments, dt, n, Vector{}, /*record_log=*/true);
  PosteriorState posterior = init_prior(truth.p(), truth.q());
  dithered_phase(plant, posterior, initial_gain, signal, n);
  Matrix theta = sample_posterior(posterior, rng);
  return {std::move(theta), std::move(posterior), plant.take_log()};
}

bool check_failure_event(const Matrix& theta_hat, const DriftParams& truth,
                         const CostSpec& cost) {
  try {
    const DriftParams est = DriftParams::from_stacked(theta_hat, truth.p(), truth.q());
    const RiccatiSolution care = solve_care(est, cost);
    return !is_hurwitz(truth.A + truth.B * care.gain);
  } catch (const std::runtime_error&) {
    return true;
  }
}

PolicyRun run_thompson_sampling(const DriftParams& truth, const NoiseSpec& noise,
                                const CostSpec& cost, const Matrix& initial_gain,
                                const EpisodeSchedule& schedule, double horizon, double dt,
                                const Matrix& increments, Rng& rng,
                                const LearningOptions& options, RunObserver* observer) {
  return run_learning("ts", Estimator::kPosteriorSample, /*explore=*/false, truth, noise, cost,
                      initial_gain, schedule, horizon, dt, increments, rng, options, observer);
}

PolicyRun run_randomized_estimate(const DriftParams& truth, const NoiseSpec& noise,
                                  const CostSpec& cost, const Matrix& initial_gain,
                                  const EpisodeSchedule& schedule, double horizon, double dt,
                                  const Matrix& increments, Rng& rng,
                                  const LearningOptions& options, RunObserver* observer) {
  return run_learning("rand-est", Estimator::kPosteriorMean, /*explore=*/true, truth, noise,
                      cost, initial_gain, schedule, horizon, dt, increments, rng, options,
                      observer);
}

namespace {

void optimal_loop(Plant& plant, const Matrix& gain) {
  Vector u(gain.rows());
  while (!plant.done()) {
    u.noalias() = gain * plant.state();
    plant.apply(u);
  }
}

}  // namespace

TrajectoryLog run_optimal(const DriftParams& truth, const NoiseSpec& noise, const CostSpec& cost,
                          double horizon, double dt, const Matrix& increments,
                          const Vector& x0) {
  check_dimensions(truth, noise, cost);
  const Matrix gain = solve_care(truth, cost).gain;
  Plant plant(truth, cost, increments, dt, steps_for_horizon(horizon, dt), x0, true);
  optimal_loop(plant, gain);
  return plant.take_log();
}

PolicyRun run_optimal_trace(const DriftParams& truth, const NoiseSpec& noise,
                            const CostSpec& cost, double horizon, double dt,
                            const Matrix& increments, RunObserver* observer, const Vector& x0) {
  check_dimensions(truth, noise, cost);
  const Matrix gain = solve_care(truth, cost).gain;
  Plant plant(truth, cost, increments, dt, steps_for_horizon(horizon, dt), x0, false, observer);
  optimal_loop(plant, gain);
  PolicyRun run;
  run.policy = "optimal";
  run.dt = dt;
  run.running_cost = plant.running_cost();
  EpisodeRecord rec;
  rec.start = 0.0;
  rec.end = horizon;
  rec.theta_hat = truth.stacked();
  rec.gain = gain;
  run.episodes.push_back(std::move(rec));
  return run;
}

Matrix find_random_stabilizer(const DriftParams& truth, Rng& rng, double scale,
                              int max_attempts) {
  for (int i = 0; i < max_attempts; ++i) {
    Matrix gain = scale * standard_normal(truth.q(), truth.p(), rng);
    if (is_hurwitz(truth.A + truth.B * gain)) return gain;
  }
  throw SolverError("no random stabilizer found", NAN);
}

}  // namespace lqts
