#include "lqts/linalg.hpp"
#include "lqts/policies.hpp"
#include "lqts/scenario.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lqts {
namespace {

using testing::max_abs;

TEST(EpisodeSchedule, GeometricEnds) {
  const EpisodeSchedule s(20.0, 0.1);
  const auto ends = s.ends_until(600.0);
  // 20 * 1.1^35 = 562.04 and 20 * 1.1^36 = 618.25.
  ASSERT_EQ(ends.size(), 36u);
  EXPECT_DOUBLE_EQ(ends.front(), 20.0);
  EXPECT_NEAR(ends.back(), 20.0 * std::pow(1.1, 35), 1e-9);
  for (std::size_t i = 1; i < ends.size(); ++i) {
    const double rel = (ends[i] - ends[i - 1]) / ends[i - 1];
    EXPECT_NEAR(rel, 0.1, 1e-12);
  }
}

TEST(EpisodeSchedule, ExplicitEndsWithinBounds) {
  const EpisodeSchedule ok({10.0, 12.0, 15.0, 18.0}, 0.2, 0.25);
  EXPECT_EQ(ok.ends_until(16.0).size(), 3u);
  EXPECT_THROW(EpisodeSchedule({10.0, 12.0, 20.0}, 0.2, 0.25), ConfigError);
  EXPECT_THROW(EpisodeSchedule({10.0, 10.5}, 0.2, 0.25), ConfigError);
  EXPECT_THROW(EpisodeSchedule(0.0, 0.1), ConfigError);
  EXPECT_THROW(EpisodeSchedule(20.0, 0.0), ConfigError);
}

TEST(DitherSpec, SegmentRules) {
  DitherSpec d;
  EXPECT_EQ(d.segments(20.0), 89);
  EXPECT_EQ(d.segments(4.0), 8);
  EXPECT_FALSE(d.meets_segment_condition(20.0));
  d.rule = KappaRule::kPow2;
  EXPECT_EQ(d.segments(20.0), 400);
  EXPECT_TRUE(d.meets_segment_condition(20.0));
  d.rule = KappaRule::kFixed;
  d.fixed_segments = 3;
  EXPECT_EQ(d.segments(100.0), 3);
}

TEST(CheckFailureEvent, TruthIsNotAFailure) {
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    EXPECT_FALSE(check_failure_event(sc.truth.stacked(), sc.truth, sc.cost)) << name;
  }
}

TEST(CheckFailureEvent, ZeroInputEstimateFailsOnUnstableTruth) {
  const Scenario sc = builtin_scenario("x29a");
  ASSERT_GT(max_real_eigenvalue(sc.truth.A), 0.0);
  const DriftParams est(sc.truth.A, Matrix::Zero(4, 2));
  EXPECT_TRUE(check_failure_event(est.stacked(), sc.truth, sc.cost));
  // An estimate whose own CARE is unsolvable also counts as a failure.
  const DriftParams hopeless(Matrix::Identity(4, 4), Matrix::Zero(4, 2));
  EXPECT_TRUE(check_failure_event(hopeless.stacked(), sc.truth, sc.cost));
}

TEST(RunStabilization, SingleSegmentEdgeCase) {
  const DriftParams truth(Matrix{{0.2, 1.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  const NoiseSpec noise(0.25 * Matrix::Identity(2, 2));
  const CostSpec cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
  const Matrix G{{-2.0, -2.0}};
  DitherSpec d;
  d.rule = KappaRule::kFixed;
  d.fixed_segments = 1;
  Rng nrng = make_rng(50, stream::kNoise);
  Rng prng = make_rng(50, stream::kPolicy);
  const Matrix inc = sample_wiener_increments(noise, 1e-2, 500, nrng);
  const auto res = run_stabilization(truth, noise, cost, G, 5.0, d, 1e-2, inc, prng);
  EXPECT_EQ(res.theta_hat.rows(), 3);
  EXPECT_EQ(res.theta_hat.cols(), 2);
  // One dither level over the whole phase.
  const Matrix& u = res.log.actions();
  const Matrix& x = res.log.states();
  const double v0 = u(0, 0) - (G * x.col(0))(0);
  for (Index k = 0; k < res.log.steps(); ++k) {
    EXPECT_NEAR(u(0, k) - (G * x.col(k))(0), v0, 1e-12);
  }
  EXPECT_NEAR(res.posterior.elapsed(), 5.0, 1e-9);
}

TEST(RunStabilization, RejectsNonStabilizingGain) {
  const Scenario sc = builtin_scenario("x29a");
  Rng nrng = make_rng(51, stream::kNoise);
  Rng prng = make_rng(51, stream::kPolicy);
  const Matrix inc = sample_wiener_increments(sc.noise, sc.dt, 4000, nrng);
  EXPECT_THROW(run_stabilization(sc.truth, sc.noise, sc.cost, Matrix::Zero(2, 4), 4.0, sc.dither,
                                 sc.dt, inc, prng),
               ConfigError);
}

TEST(RunStabilization, ErrorShrinksLikeInverseSqrtTau) {
  // Median spectral error of the posterior mean should roughly halve when
  // tau quadruples. A well-excited random system is used so that the prior
  // no longer dominates any direction at tau = 16.
  Rng rng = make_rng(52, 0);
  const DriftParams truth(testing::random_stable(3, rng), standard_normal(3, 2, rng));
  const NoiseSpec noise(0.25 * Matrix::Identity(3, 3));
  const CostSpec cost(Matrix::Identity(3, 3), Matrix::Identity(2, 2));
  DitherSpec dither;
  dither.sigma = 1.0;
  const double dt = 1e-3;
  auto median_error = [&](double tau) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      Rng nrng = make_rng(seed, stream::kNoise);
      Rng prng = make_rng(seed, stream::kPolicy);
      const Matrix inc = sample_wiener_increments(noise, dt, steps_for_horizon(tau, dt), nrng);
      const auto res = run_stabilization(truth, noise, cost, Matrix::Zero(2, 3), tau, dither, dt,
                                         inc, prng);
      errs.push_back(estimation_error(posterior_mean_cov(res.posterior).mean, truth.stacked()));
    }
    std::nth_element(errs.begin(), errs.begin() + 7, errs.end());
    return errs[7];
  };
  const double ratio = median_error(64.0) / median_error(16.0);
  EXPECT_GT(ratio, 0.35);
  EXPECT_LT(ratio, 0.7);
}

struct EpisodeLogger : RunObserver {
  std::vector<double> starts;
  std::vector<double> elapsed;
  void on_episode(const EpisodeRecord& r, const PosteriorState& post) override {
    starts.push_back(r.start);
    elapsed.push_back(post.elapsed());
  }
};

class LearningRun : public ::testing::Test {
 protected:
  void SetUp() override {
    sc = builtin_scenario("x29a");
    Rng nrng = make_rng(60, stream::kNoise);
    inc = sample_wiener_increments(sc.noise, sc.dt, steps_for_horizon(horizon, sc.dt), nrng);
  }
  Scenario sc;
  double horizon = 80.0;
  Matrix inc;
};

TEST_F(LearningRun, GainIsConstantWithinEpisodes) {
  Rng prng = make_rng(60, stream::kPolicy);
  LearningOptions opts;
  opts.record_log = true;
  const EpisodeSchedule sched(sc.tau0, sc.growth);
  EpisodeLogger logger;
  const PolicyRun run = run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain, sched,
                                              horizon, sc.dt, inc, prng, opts, &logger);
  ASSERT_FALSE(run.failed);
  ASSERT_TRUE(run.log.has_value());
  const auto ends = sched.ends_until(horizon);
  ASSERT_EQ(run.episodes.size(), ends.size());
  for (const auto& e : run.episodes) {
    const Index begin = std::llround(e.start / sc.dt);
    const Index end = std::llround(e.end / sc.dt);
    for (Index k = begin; k < end; ++k) {
      const Vector expected = e.gain * run.log->states().col(k);
      ASSERT_EQ(run.log->actions().col(k), expected) << "step " << k;
    }
  }
  // The posterior used at each episode is the one accumulated up to its
  // start, snapped to the grid.
  ASSERT_EQ(logger.starts.size(), logger.elapsed.size());
  for (std::size_t i = 0; i < logger.starts.size(); ++i) {
    EXPECT_NEAR(logger.elapsed[i], logger.starts[i], 0.5 * sc.dt + 1e-9);
  }
}

TEST_F(LearningRun, InjectedTruthReproducesOptimalPolicy) {
  Rng prng = make_rng(61, stream::kPolicy);
  LearningOptions opts;
  opts.record_log = true;
  opts.injected_theta = sc.truth.stacked();
  const PolicyRun run =
      run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                            EpisodeSchedule(sc.tau0, sc.growth), horizon, sc.dt, inc, prng, opts);
  const TrajectoryLog opt = run_optimal(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
  EXPECT_EQ(run.log->actions(), opt.actions());
  EXPECT_EQ(run.log->states(), opt.states());
  EXPECT_EQ(run.running_cost, opt.running_cost());
}

TEST_F(LearningRun, RandomizedEstimateWithoutExplorationReducesToOptimal) {
  Rng prng = make_rng(62, stream::kPolicy);
  LearningOptions opts;
  opts.record_log = true;
  opts.injected_theta = sc.truth.stacked();
  opts.exploration_sigma = 0.0;
  const PolicyRun run =
      run_randomized_estimate(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                              EpisodeSchedule(sc.tau0, sc.growth), horizon, sc.dt, inc, prng, opts);
  const TrajectoryLog opt = run_optimal(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
  EXPECT_EQ(run.log->actions(), opt.actions());
}

TEST_F(LearningRun, RandomizedEstimateExploresAroundMeanGain) {
  Rng prng = make_rng(63, stream::kPolicy);
  LearningOptions opts;
  opts.record_log = true;
  const PolicyRun run =
      run_randomized_estimate(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                              EpisodeSchedule(sc.tau0, sc.growth), horizon, sc.dt, inc, prng, opts);
  ASSERT_FALSE(run.failed);
  const auto& e = run.episodes.front();
  ASSERT_EQ(e.redraws, 0);
  // First episode: gain from the posterior mean, actions offset by noise.
  const Index begin = std::llround(e.start / sc.dt);
  const Index end = std::llround(e.end / sc.dt);
  double ss = 0.0;
  for (Index k = begin; k < end; ++k) {
    ss += (run.log->actions().col(k) - e.gain * run.log->states().col(k)).squaredNorm();
  }
  const double rms = std::sqrt(ss / (2.0 * static_cast<double>(end - begin)));
  const double expected = sc.dither.sigma * std::pow(sc.tau0, -0.25);
  EXPECT_GT(rms, 0.5 * expected);
  EXPECT_LT(rms, 1.5 * expected);
}

TEST_F(LearningRun, CommonRandomNumbersAcrossPolicies) {
  Rng p1 = make_rng(64, stream::kPolicy);
  Rng p2 = make_rng(64, stream::kPolicy);
  LearningOptions opts;
  opts.record_log = true;
  const EpisodeSchedule sched(sc.tau0, sc.growth);
  const PolicyRun ts = run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain, sched,
                                             horizon, sc.dt, inc, p1, opts);
  const PolicyRun re = run_randomized_estimate(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                                               sched, horizon, sc.dt, inc, p2, opts);
  const TrajectoryLog opt = run_optimal(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
  EXPECT_EQ(ts.log->noise_increments(), opt.noise_increments());
  EXPECT_EQ(re.log->noise_increments(), opt.noise_increments());
}

TEST_F(LearningRun, Deterministic) {
  const EpisodeSchedule sched(sc.tau0, sc.growth);
  Rng a = make_rng(65, stream::kPolicy);
  Rng b = make_rng(65, stream::kPolicy);
  const PolicyRun r1 =
      run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain, sched, horizon, sc.dt, inc, a);
  const PolicyRun r2 =
      run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain, sched, horizon, sc.dt, inc, b);
  EXPECT_EQ(r1.running_cost, r2.running_cost);
}

TEST_F(LearningRun, HorizonShorterThanTau0IsRejected) {
  Rng prng = make_rng(66, stream::kPolicy);
  EXPECT_THROW(run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                                     EpisodeSchedule(sc.tau0, sc.growth), 10.0, sc.dt, inc, prng),
               ConfigError);
}

TEST(InstabilityResampling, ExhaustedBudgetMarksRunFailed) {
  // Every draw is replaced by an estimate that believes the input acts with
  // the opposite sign, so each redraw blows up again.
  const Scenario sc = builtin_scenario("x29a");
  // One long episode after t = 1 so the redraws all fall in it.
  const double horizon = 40.0;
  Rng nrng = make_rng(70, stream::kNoise);
  const Matrix inc =
      sample_wiener_increments(sc.noise, sc.dt, steps_for_horizon(horizon, sc.dt), nrng);
  Rng prng = make_rng(70, stream::kPolicy);
  DriftParams wrong = sc.truth;
  wrong.B = -sc.truth.B;
  ASSERT_TRUE(check_failure_event(wrong.stacked(), sc.truth, sc.cost));
  LearningOptions opts;
  opts.injected_theta = wrong.stacked();
  opts.resample.max_redraws = 3;
  opts.resample.blowup_factor = 10.0;
  const PolicyRun run = run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain,
                                              EpisodeSchedule(1.0, 100.0), horizon, sc.dt, inc,
                                              prng, opts);
  EXPECT_TRUE(run.failed);
  EXPECT_FALSE(run.failure_reason.empty());
  ASSERT_FALSE(run.episodes.empty());
  EXPECT_GT(run.episodes.back().redraws, 3);
  // The initial feedback carries the run to the horizon.
  EXPECT_EQ(run.running_cost.size(), steps_for_horizon(horizon, sc.dt));
  EXPECT_TRUE(std::isfinite(run.running_cost(run.running_cost.size() - 1)));
}

TEST(RunOptimal, ZeroNoiseZeroState) {
  const Scenario sc = builtin_scenario("x29a");
  const Matrix inc = Matrix::Zero(4, 1000);
  const TrajectoryLog log = run_optimal(sc.truth, sc.noise, sc.cost, 1.0, sc.dt, inc);
  EXPECT_EQ(max_abs(log.states()), 0.0);
  EXPECT_EQ(log.running_cost()(999), 0.0);
}

TEST(RunOptimal, AverageCostMatchesTraceKC) {
  // The slow closed-loop mode makes time averages noisy, so the check is a
  // band of four standard errors across seeds, and the band must be narrow.
  const Scenario sc = builtin_scenario("x29a");
  const double target = (solve_care(sc.truth, sc.cost).K * sc.noise.C).trace();
  const double horizon = 500.0;
  const int seeds = 10;
  std::vector<double> avg;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng nrng = make_rng(80 + seed, stream::kNoise);
    const Matrix inc = sample_wiener_increments(sc.noise, sc.dt, steps_for_horizon(horizon, sc.dt), nrng);
    const PolicyRun r = run_optimal_trace(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
    avg.push_back(r.running_cost(r.running_cost.size() - 1) / horizon);
  }
  const double mean = std::accumulate(avg.begin(), avg.end(), 0.0) / seeds;
  double ss = 0.0;
  for (double a : avg) ss += (a - mean) * (a - mean);
  const double se = std::sqrt(ss / (seeds - 1) / seeds);
  EXPECT_LT(se, 0.05 * target);
  EXPECT_NEAR(mean, target, 4.0 * se);
}

TEST(FindRandomStabilizer, ReturnsStabilizingGain) {
  const Scenario sc = builtin_scenario("glucose");
  Rng rng = make_rng(90, 0);
  const Matrix G = find_random_stabilizer(sc.truth, rng, 1.0);
  EXPECT_TRUE(is_hurwitz(sc.truth.A + sc.truth.B * G));
  // Input cannot reach the unstable mode: no gain works.
  const DriftParams bad(Matrix{{1.0, 0.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  EXPECT_THROW(find_random_stabilizer(bad, rng, 1.0, 200), SolverError);
}

}  // namespace
}  // namespace lqts
