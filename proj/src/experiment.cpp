#include "lqts/experiment.hpp"

#include "lqts/parallel.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

namespace lqts {

namespace {

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("bad number '" + s + "' in " + what);
  return v;
}

}  // namespace

std::vector<SweepRow> run_stabilization_sweep(const SweepConfig& config) {
  const Scenario& sc = config.scenario;
  if (config.taus.empty()) throw ConfigError("tau grid is empty");
  if (config.reps < 1) throw ConfigError("need at least one replication");
  for (double tau : config.taus) {
    if (!(tau >= 10.0 * sc.dt)) throw ConfigError("every tau must be at least 10 time steps");
  }

  const std::size_t ntau = config.taus.size();
  const auto reps = static_cast<std::int64_t>(config.reps);
  // One job per (tau, replication); outcome[j] is 1 on success.
  std::vector<char> outcome(ntau * static_cast<std::size_t>(reps), 0);
  for_each_replication(static_cast<std::int64_t>(outcome.size()), config.threads,
                       [&](std::int64_t j) {
                         const auto t = static_cast<std::size_t>(j / reps);
                         const std::uint64_t seed =
                             config.base_seed + static_cast<std::uint64_t>(j % reps);
                         const double tau = config.taus[t];
                         Rng noise_rng = make_rng(seed, stream::kNoise);
                         Rng policy_rng = make_rng(seed, stream::kPolicy);
                         const Matrix inc = sample_wiener_increments(
                             sc.noise, sc.dt, steps_for_horizon(tau, sc.dt), noise_rng);
                         const StabilizationResult res =
                             run_stabilization(sc.truth, sc.noise, sc.cost, sc.initial_gain, tau,
                                               sc.dither, sc.dt, inc, policy_rng);
                         outcome[static_cast<std::size_t>(j)] =
                             check_failure_event(res.theta_hat, sc.truth, sc.cost) ? 0 : 1;
                       });

  std::vector<SweepRow> rows;
  for (std::size_t t = 0; t < ntau; ++t) {
    SweepRow row;
    row.tau = config.taus[t];
    row.reps = config.reps;
    for (std::int64_t r = 0; r < reps; ++r) {
      row.successes += outcome[t * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
    }
    row.success_rate = static_cast<double>(row.successes) / row.reps;
    row.seed = config.base_seed;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_tau_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("tau grid must look like a:b:step");
  const double a = parse_double(parts[0], "tau grid");
  const double b = parse_double(parts[1], "tau grid");
  const double step = parse_double(parts[2], "tau grid");
  if (!(step > 0.0) || !(b >= a) || !(a > 0.0)) {
    throw ConfigError("tau grid needs 0 < a <= b and step > 0");
  }
  std::vector<double> taus;
  const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= n; ++i) taus.push_back(a + static_cast<double>(i) * step);
  return taus;
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kThompson:
      return "ts";
    case PolicyKind::kRandomizedEstimate:
      return "rand-est";
    case PolicyKind::kOptimal:
      return "optimal";
  }
  return "ts";
}

PolicyKind parse_policy(const std::string& text) {
  if (text == "ts") return PolicyKind::kThompson;
  if (text == "rand-est") return PolicyKind::kRandomizedEstimate;
  if (text == "optimal") return PolicyKind::kOptimal;
  throw ConfigError("unknown policy '" + text + "' (expected ts, rand-est or optimal)");
}

std::vector<ExperimentResult> RegretOutput::for_policy(std::size_t policy_index) const {
  std::vector<ExperimentResult> out;
  for (int r = 0; r < reps; ++r) out.push_back(at(policy_index, r));
  return out;
}

RegretOutput run_regret_experiment(const RegretConfig& config) {
  const Scenario& sc = config.scenario;
  if (config.reps < 1) throw ConfigError("need at least one replication");
  if (config.policies.empty()) throw ConfigError("no policy selected");
  if (!(config.horizon >= sc.tau0)) throw ConfigError("horizon must be at least tau_0");
  const std::vector<double> checkpoints =
      config.checkpoints.empty() ? default_checkpoints(config.horizon) : config.checkpoints;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 1.0) || checkpoints[i] > config.horizon ||
        (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))) {
      throw ConfigError("checkpoints must be increasing, above 1 and within the horizon");
    }
  }
  const EpisodeSchedule schedule(sc.tau0, sc.growth);
  LearningOptions options = config.options;
  options.dither = sc.dither;
  const Index n = steps_for_horizon(config.horizon, sc.dt);
  const std::size_t npol = config.policies.size();

  RegretOutput out;
  out.policies = config.policies;
  out.reps = config.reps;
  out.results.resize(npol * static_cast<std::size_t>(config.reps));

  for_each_replication(config.reps, config.threads, [&](std::int64_t r) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
    Rng noise_rng = make_rng(seed, stream::kNoise);
    const Matrix inc = sample_wiener_increments(sc.noise, sc.dt, n, noise_rng);
    const PolicyRun optimal =
        run_optimal_trace(sc.truth, sc.noise, sc.cost, config.horizon, sc.dt, inc);

    for (std::size_t k = 0; k < npol; ++k) {
      const auto start = std::chrono::steady_clock::now();
      OracleMonitor monitor(sc.truth, sc.cost, sc.noise, sc.dt, sc.tau0);
      // Each policy draws from its own copy of the policy stream.
      Rng policy_rng = make_rng(seed, stream::kPolicy);
      PolicyRun run;
      switch (config.policies[k]) {
        case PolicyKind::kThompson:
          run = run_thompson_sampling(sc.truth, sc.noise, sc.cost, sc.initial_gain, schedule,
                                      config.horizon, sc.dt, inc, policy_rng, options, &monitor);
          break;
        case PolicyKind::kRandomizedEstimate:
          run = run_randomized_estimate(sc.truth, sc.noise, sc.cost, sc.initial_gain, schedule,
                                        config.horizon, sc.dt, inc, policy_rng, options,
                                        &monitor);
          break;
        case PolicyKind::kOptimal:
          run = run_optimal_trace(sc.truth, sc.noise, sc.cost, config.horizon, sc.dt, inc,
                                  &monitor);
          break;
      }
      ExperimentResult res = summarize(run, optimal, sc.truth, checkpoints, &monitor);
      res.scenario = sc.name;
      res.seed = seed;
      res.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.results[k * static_cast<std::size_t>(config.reps) + static_cast<std::size_t>(r)] =
          std::move(res);
    }
  });
  return out;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) throw ValidationError("refusing to write a non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "tau,reps,successes,success_rate,seed\n";
  for (const auto& r : rows) {
    out << format_number(r.tau) << ',' << r.reps << ',' << r.successes << ','
        << format_number(r.success_rate) << ',' << r.seed << '\n';
  }
}

void write_regret_csv(const RegretOutput& output, std::ostream& out) {
  out << "policy,T,rep,regret,norm_regret,est_err_sq,norm_est_err\n";
  auto row = [&](const std::string& policy, const std::string& rep, const Checkpoint& c) {
    out << policy << ',' << format_number(c.time) << ',' << rep << ','
        << format_number(c.regret) << ',' << format_number(c.normalized_regret) << ','
        << format_number(c.est_err_sq) << ',' << format_number(c.normalized_est_err) << '\n';
  };
  for (std::size_t k = 0; k < output.policies.size(); ++k) {
    const std::string name = policy_name(output.policies[k]);
    for (int r = 0; r < output.reps; ++r) {
      for (const auto& c : output.at(k, r).checkpoints) row(name, std::to_string(r), c);
    }
  }
  for (std::size_t k = 0; k < output.policies.size(); ++k) {
    const std::string name = policy_name(output.policies[k]);
    const Aggregate agg = aggregate(output.for_policy(k));
    for (const auto& c : agg.mean) row(name, "mean", c);
    for (const auto& c : agg.worst) row(name, "worst", c);
  }
}

}  // namespace lqts
