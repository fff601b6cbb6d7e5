#include "lqts/metrics.hpp"

#include "lqts/linalg.hpp"
#include "lqts/riccati.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lqts {

namespace {

Index steps_until(double t, double dt) { return static_cast<Index>(std::llround(t / dt)); }

}  // namespace

double cost_until(const Vector& running_cost, double dt, double t) {
  const Index m = steps_until(t, dt);
  if (m <= 0) return 0.0;
  if (m > running_cost.size()) throw PairingError("checkpoint lies beyond the run");
  return running_cost(m - 1);
}

std::vector<double> regret_from_costs(const Vector& policy_cost, const Vector& optimal_cost,
                                      double dt, const std::vector<double>& checkpoints) {
  if (policy_cost.size() != optimal_cost.size()) {
    throw PairingError("runs cover different numbers of steps");
  }
  std::vector<double> out;
  out.reserve(checkpoints.size());
  for (double t : checkpoints) {
    out.push_back(cost_until(policy_cost, dt, t) - cost_until(optimal_cost, dt, t));
  }
  return out;
}

std::vector<std::pair<double, double>> regret(const TrajectoryLog& policy_log,
                                              const TrajectoryLog& optimal_log,
                                              const std::vector<double>& checkpoints) {
  if (policy_log.step() != optimal_log.step() || policy_log.steps() != optimal_log.steps()) {
    throw PairingError("logs are on different time grids");
  }
  if (policy_log.noise_increments() != optimal_log.noise_increments()) {
    throw PairingError("logs were not produced on the same noise increments");
  }
  const std::vector<double> r = regret_from_costs(
      policy_log.running_cost(), optimal_log.running_cost(), policy_log.step(), checkpoints);
  std::vector<std::pair<double, double>> out;
  out.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out.emplace_back(checkpoints[i], r[i]);
  return out;
}

double normalize_regret(double regret, double horizon, Index p, Index q) {
  if (!(horizon > 1.0)) throw std::domain_error("regret normalization needs T > 1");
  return regret / (static_cast<double>(p * (p + q)) * std::sqrt(horizon) * std::log(horizon));
}

double normalize_estimation_error(double error_sq, double tau, Index p, Index q) {
  if (!(tau > 1.0)) throw std::domain_error("error normalization needs tau > 1");
  return error_sq / (static_cast<double>(p * (p + q)) * std::log(tau) / std::sqrt(tau));
}

SelfNormalized self_normalized_stat(const PosteriorState& posterior, const Matrix& noise_product,
                                    const NoiseSpec& noise) {
  const Index d = posterior.p() + posterior.q();
  if (noise_product.rows() != d || noise_product.cols() != posterior.p()) {
    throw ShapeError("noise product must be (p+q) x p");
  }
  posterior_mean_cov(posterior);  // conditioning check
  Eigen::LLT<Matrix> llt(posterior.precision());
  const Matrix whitened = llt.matrixL().solve(noise_product);
  SelfNormalized out;
  out.stat = max_sym_eigenvalue(whitened.transpose() * whitened);
  out.budget = static_cast<double>(posterior.p()) * max_sym_eigenvalue(noise.C) *
               (log_det_spd(posterior.precision()) - log_det_spd(posterior.prior_precision()));
  return out;
}

double action_deviation(const Vector& x, const Vector& u, const Matrix& optimal_gain) {
  return (u - optimal_gain * x).squaredNorm();
}

double action_deviation_integral(const TrajectoryLog& policy_log, const DriftParams& truth,
                                 const CostSpec& cost, double from_time) {
  if (policy_log.states().rows() != truth.p() || policy_log.actions().rows() != truth.q()) {
    throw ShapeError("log dimensions do not match the truth");
  }
  const Matrix gain = solve_care(truth, cost).gain;
  const Index first = std::max<Index>(0, steps_until(from_time, policy_log.step()));
  double acc = 0.0;
  for (Index k = first; k < policy_log.steps(); ++k) {
    acc += action_deviation(policy_log.states().col(k), policy_log.actions().col(k), gain) *
           policy_log.step();
  }
  return acc;
}

std::vector<double> default_checkpoints(double horizon) {
  std::vector<double> out;
  for (double t : {25.0, 50.0}) {
    if (t <= horizon) out.push_back(t);
  }
  for (double t = 100.0; t <= horizon; t += 50.0) out.push_back(t);
  if (out.empty() || out.back() < horizon) out.push_back(horizon);
  return out;
}

OracleMonitor::OracleMonitor(const DriftParams& truth, const CostSpec& cost,
                             const NoiseSpec& noise, double dt, double deviation_from)
    : noise_(noise),
      optimal_gain_(solve_care(truth, cost).gain),
      dt_(dt),
      from_step_(steps_until(deviation_from, dt)),
      noise_product_(Matrix::Zero(truth.p() + truth.q(), truth.p())),
      z_(truth.p() + truth.q()) {}

void OracleMonitor::on_step(Index k, const Vector& x, const Vector& u, const Vector& dW) {
  if (k >= from_step_) deviation_acc_ += action_deviation(x, u, optimal_gain_) * dt_;
  deviation_.push_back(deviation_acc_);
  z_.head(x.size()) = x;
  z_.tail(u.size()) = u;
  noise_product_.noalias() += z_ * dW.transpose();
}

void OracleMonitor::on_episode(const EpisodeRecord& record, const PosteriorState& posterior) {
  if (static_cast<std::size_t>(record.index) < self_normalized_.size()) return;  // redraw
  self_normalized_.push_back(self_normalized_stat(posterior, noise_product_, noise_));
}

ExperimentResult summarize(const PolicyRun& policy_run, const PolicyRun& optimal_run,
                           const DriftParams& truth, const std::vector<double>& checkpoints,
                           const OracleMonitor* monitor) {
  const Index p = truth.p();
  const Index q = truth.q();
  const Matrix theta0 = truth.stacked();
  const double dt = policy_run.dt;
  if (dt != optimal_run.dt) throw PairingError("runs use different time steps");

  ExperimentResult res;
  res.policy = policy_run.policy;
  res.episodes = policy_run.episodes;
  res.failed = policy_run.failed;
  res.failure_reason = policy_run.failure_reason;

  for (std::size_t i = 0; i < res.episodes.size(); ++i) {
    const EpisodeRecord& e = res.episodes[i];
    EpisodeSummary s;
    s.index = e.index;
    s.start = e.start;
    s.redraws = e.redraws;
    if (e.theta_hat.size() > 0) {
      const double err = estimation_error(e.theta_hat, theta0);
      s.est_err_sq = err * err;
      s.normalized_est_err =
          e.start > 1.0 ? normalize_estimation_error(s.est_err_sq, e.start, p, q) : 0.0;
    } else {
      s.est_err_sq = NAN;
      s.normalized_est_err = NAN;
    }
    if (monitor != nullptr && i < monitor->self_normalized().size()) {
      s.self_normalized = monitor->self_normalized()[i];
    }
    res.episode_summaries.push_back(s);
  }

  const std::vector<double> r =
      regret_from_costs(policy_run.running_cost, optimal_run.running_cost, dt, checkpoints);
  const double prior_err_sq = std::pow(spectral_norm(theta0), 2);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    Checkpoint c;
    c.time = checkpoints[i];
    c.regret = r[i];
    c.normalized_regret = normalize_regret(c.regret, c.time, p, q);
    // Current estimate: the latest episode that started by this time.
    const EpisodeSummary* current = nullptr;
    for (const auto& s : res.episode_summaries) {
      if (s.start <= c.time && std::isfinite(s.est_err_sq)) current = &s;
    }
    if (current != nullptr) {
      c.est_err_sq = current->est_err_sq;
      c.normalized_est_err = current->normalized_est_err;
    } else {
      c.est_err_sq = prior_err_sq;
      c.normalized_est_err = normalize_estimation_error(prior_err_sq, c.time, p, q);
    }
    if (monitor != nullptr) {
      const Index m = steps_until(c.time, dt);
      c.action_deviation =
          m > 0 ? monitor->deviation().at(static_cast<std::size_t>(m - 1)) : 0.0;
    }
    res.checkpoints.push_back(c);
  }
  return res;
}

Aggregate aggregate(const std::vector<ExperimentResult>& results) {
  Aggregate agg;
  if (results.empty()) return agg;
  const std::size_t n = results.front().checkpoints.size();
  for (const auto& r : results) {
    if (r.checkpoints.size() != n) throw PairingError("replications use different checkpoints");
  }
  agg.mean.resize(n);
  agg.worst.resize(n);
  const double reps = static_cast<double>(results.size());
  for (std::size_t i = 0; i < n; ++i) {
    Checkpoint& m = agg.mean[i];
    Checkpoint& w = agg.worst[i];
    m.time = w.time = results.front().checkpoints[i].time;
    w.regret = w.normalized_regret = w.est_err_sq = w.normalized_est_err =
        w.action_deviation = -INFINITY;
    for (const auto& r : results) {
      const Checkpoint& c = r.checkpoints[i];
      m.regret += c.regret / reps;
      m.normalized_regret += c.normalized_regret / reps;
      m.est_err_sq += c.est_err_sq / reps;
      m.normalized_est_err += c.normalized_est_err / reps;
      m.action_deviation += c.action_deviation / reps;
      w.regret = std::max(w.regret, c.regret);
      w.normalized_regret = std::max(w.normalized_regret, c.normalized_regret);
      w.est_err_sq = std::max(w.est_err_sq, c.est_err_sq);
      w.normalized_est_err = std::max(w.normalized_est_err, c.normalized_est_err);
      w.action_deviation = std::max(w.action_deviation, c.action_deviation);
    }
  }
  return agg;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("rank_correlation needs two equal-length samples");
  }
  return pearson(ranks(a), ranks(b));
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log_log_slope needs two equal-length samples");
  }
  std::vector<double> lx(x.size()), ly(y.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace lqts
