// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "lqts/experiment.hpp"
#include "lqts/linalg.hpp"
#include "lqts/metrics.hpp"
#include "lqts/parallel.hpp"
#include "lqts/riccati.hpp"
#include "lqts/scenario.hpp"
#include "lqts/sde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifndef LQTS_CLI_PATH
#error "LQTS_CLI_PATH must point at the CLI executable"
#endif

namespace {

using namespace lqts;

// Pinned tolerances and budgets.
constexpr double kCareResidual = 1e-8;
constexpr double kCareSeconds = 5.0;
constexpr double kClosedFormTol = 1e-12;
constexpr double kDerivativeRelTol = 1e-4;
constexpr double kDerivativeSeconds = 10.0;
constexpr double kMaxEigCondition = 1e4;
constexpr double kPerturbationSeconds = 10.0;
constexpr double kDominanceTol = -1e-8;
constexpr double kOuRelTol = 0.10;
constexpr double kEulerRatioLo = 0.4;
constexpr double kEulerRatioHi = 0.6;
constexpr double kSweepSlack = 0.03;
constexpr double kSweepMinGain = 0.10;
constexpr double kSweepSeconds = 15 * 60.0;
constexpr double kSlopeLo = -0.8;
constexpr double kSlopeHi = -0.3;
constexpr double kLearningSeconds = 20 * 60.0;
constexpr double kRegretGrowth = 2.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool valid_care(const DriftParams& d, const CostSpec& c, double* worst_residual) {
  const RiccatiSolution s = solve_care(d, c);
  const double res = care_residual(d, c, s.K);
  *worst_residual = std::max(*worst_residual, res);
  const bool symmetric = (s.K - s.K.transpose()).cwiseAbs().maxCoeff() == 0.0;
  return res <= kCareResidual && symmetric && min_sym_eigenvalue(s.K) >= -1e-12 &&
         is_hurwitz(d.A + d.B * s.gain);
}

Outcome care_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int bad = 0;
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    if (!valid_care(sc.truth, sc.cost, &worst)) ++bad;
  }
  Rng rng = make_rng(1001, 0);
  for (int i = 0; i < 100; ++i) {
    const Index p = 1 + i % 6;
    const Index q = 1 + (i / 6) % p;
    const DriftParams d(standard_normal(p, p, rng), standard_normal(p, q, rng));
    const Matrix L = standard_normal(p, p, rng);
    const Matrix R = standard_normal(q, q, rng);
    const CostSpec c(L * L.transpose() + 0.1 * Matrix::Identity(p, p),
                     R * R.transpose() + 0.1 * Matrix::Identity(q, q));
    if (!valid_care(d, c, &worst)) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < kCareSeconds,
          std::to_string(bad) + " invalid of 103, worst residual " + fmt("%.2e", worst) +
              ", " + fmt("%.2f s", secs)};
}

Outcome closed_forms() {
  double err = 0.0;
  const Matrix I2 = Matrix::Identity(2, 2);
  {
    const RiccatiSolution s = solve_care(DriftParams(Matrix::Zero(1, 1), Matrix::Ones(1, 1)),
                                         CostSpec(Matrix::Ones(1, 1), Matrix::Ones(1, 1)));
    err = std::max(err, std::abs(s.K(0, 0) - 1.0));
  }
  {
    const RiccatiSolution s = solve_care(DriftParams(-I2, I2), CostSpec(I2, I2));
    err = std::max(err, (s.K - (std::sqrt(2.0) - 1.0) * I2).cwiseAbs().maxCoeff());
  }
  {
    const Matrix Q{{2.0, 0.3}, {0.3, 1.0}};
    err = std::max(err, (solve_lyapunov(-0.5 * I2, Q) - Q).cwiseAbs().maxCoeff());
  }
  {
    const Matrix P = solve_lyapunov(Matrix{{-1.0, 0.0}, {0.0, -3.0}}, I2);
    err = std::max(err, (P - Matrix{{0.5, 0.0}, {0.0, 1.0 / 6.0}}).cwiseAbs().maxCoeff());
  }
  return {err <= kClosedFormTol, "max abs error " + fmt("%.2e", err)};
}

Outcome riccati_derivative() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = builtin_scenario("x29a");
  const Index p = sc.p();
  const Index q = sc.q();
  Rng rng = make_rng(1003, 0);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Matrix dA = standard_normal(p, p, rng);
    Matrix dB = standard_normal(p, q, rng);
    const double norm = std::sqrt(dA.squaredNorm() + dB.squaredNorm());
    dA /= norm;
    dB /= norm;
    const DriftParams hi(sc.truth.A + eps * dA, sc.truth.B + eps * dB);
    const DriftParams lo(sc.truth.A - eps * dA, sc.truth.B - eps * dB);
    const Matrix Khi = solve_care(hi, sc.cost).K;
    const Matrix Klo = solve_care(lo, sc.cost).K;
    const Matrix dK = riccati_directional_derivative(sc.truth, sc.cost, dA, dB);
    worst = std::max(worst, ((Khi - Klo) / (2 * eps) - dK).norm() / dK.norm());
    const Matrix fd = (hi.B.transpose() * Khi - lo.B.transpose() * Klo) / (2 * eps);
    const Matrix dBK = feedback_directional_derivative(sc.truth, sc.cost, dA, dB);
    worst = std::max(worst, (fd - dBK).norm() / dBK.norm());
  }
  const double secs = seconds_since(t0);
  return {worst <= kDerivativeRelTol && secs < kDerivativeSeconds,
          "worst relative error " + fmt("%.2e", worst) + " over 20 directions"};
}

Outcome perturbation_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(1004, 0);
  int checked = 0;
  int dominated = 0;
  while (checked < 1000) {
    const Matrix M = standard_normal(4, 4, rng);
    if (!(eigenvector_condition(M) < kMaxEigCondition)) continue;
    const double size = std::pow(10.0, -3.0 + 3.0 * (checked % 7) / 6.0);
    const Matrix E = size * standard_normal(4, 4, rng);
    const double shift = std::abs(max_real_eigenvalue(M + E) - max_real_eigenvalue(M));
    if (eig_perturbation_bound(M, E, kMaxEigCondition) >= shift) ++dominated;
    ++checked;
  }
  const double secs = seconds_since(t0);
  return {dominated == checked && secs < kPerturbationSeconds,
          std::to_string(dominated) + "/" + std::to_string(checked) + " dominated"};
}

Outcome suboptimality_dominance() {
  double worst = INFINITY;
  std::uint64_t s = 0;
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    const Matrix K = solve_care(sc.truth, sc.cost).K;
    Rng rng = make_rng(1005 + s++, 0);
    for (int i = 0; i < 100; ++i) {
      const Matrix G = find_random_stabilizer(sc.truth, rng, 1.0);
      worst = std::min(worst, min_sym_eigenvalue(cost_of_feedback(sc.truth, sc.cost, G) - K));
    }
  }
  return {worst >= kDominanceTol, "min eigenvalue " + fmt("%.3e", worst) + " over 300 gains"};
}

Outcome sde_fidelity() {
  // Closed loop with eigenvalues -1 and -2 and correlated noise.
  const DriftParams d(Matrix{{0.0, 1.0}, {0.0, 0.0}}, Matrix{{0.0}, {1.0}});
  const Matrix gain{{-2.0, -3.0}};
  const NoiseSpec noise(Matrix{{0.5, 0.1}, {0.1, 1.0}});
  const CostSpec cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
  const double dt = 1e-3;
  const double horizon = 200.0;
  const Index n = steps_for_horizon(horizon, dt);
  const Index burn = steps_for_horizon(10.0, dt);
  Matrix cov = Matrix::Zero(2, 2);
  double count = 0;
  for (int path = 0; path < 20; ++path) {
    Rng rng = make_rng(1006 + path, stream::kNoise);
    const Matrix inc = sample_wiener_increments(noise, dt, n, rng);
    const TrajectoryLog log =
        simulate_feedback(d, noise, cost, gain, std::nullopt, Vector::Zero(2), horizon, dt, inc);
    for (Index k = burn; k <= n; ++k) {
      cov += log.states().col(k) * log.states().col(k).transpose();
      count += 1;
    }
  }
  cov /= count;
  const Matrix P = ou_stationary_covariance(d.A + d.B * gain, noise.C);
  const double rel = (cov - P).norm() / P.norm();

  const DriftParams e(Matrix{{-0.5, 1.0}, {-1.0, -0.3}}, Matrix::Zero(2, 1));
  const Vector x0{{1.0, -0.5}};
  const Vector exact = matrix_exponential(3.0 * e.A) * x0;
  auto terminal_error = [&](double h) {
    Vector x = x0;
    const Index m = steps_for_horizon(3.0, h);
    for (Index k = 0; k < m; ++k) x = euler_step(x, Vector::Zero(1), e, Vector::Zero(2), h);
    return (x - exact).norm();
  };
  const double ratio = terminal_error(5e-4) / terminal_error(1e-3);
  return {rel <= kOuRelTol && ratio >= kEulerRatioLo && ratio <= kEulerRatioHi,
          "OU relative error " + fmt("%.3f", rel) + ", Euler ratio " + fmt("%.4f", ratio)};
}

Outcome stabilization_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig c;
  c.scenario = builtin_scenario("x29a");
  c.scenario.dither.sigma = 5.0;
  c.scenario.dither.rule = KappaRule::kPow1_5;
  c.taus = {4, 8, 12, 16, 20};
  c.reps = 200;
  c.base_seed = 1;
  c.threads = max_threads();
  const auto rows = run_stabilization_sweep(c);
  bool monotone = true;
  std::string rates;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rates += (i ? "," : "") + fmt("%.3f", rows[i].success_rate);
    if (i > 0 && rows[i].success_rate < rows[i - 1].success_rate - kSweepSlack) monotone = false;
  }
  const double gain = rows.back().success_rate - rows.front().success_rate;
  const double secs = seconds_since(t0);
  return {monotone && gain >= kSweepMinGain && secs < kSweepSeconds,
          "rates " + rates + ", gain " + fmt("%.3f", gain)};
}

RegretOutput learning_runs(int reps) {
  RegretConfig c;
  c.scenario = builtin_scenario("x29a");
  c.policies = {PolicyKind::kThompson, PolicyKind::kRandomizedEstimate};
  c.horizon = 600.0;
  c.reps = reps;
  c.base_seed = 1;
  c.threads = max_threads();
  return run_regret_experiment(c);
}

Outcome estimation_rate(const RegretOutput& out, double secs) {
  std::map<double, std::vector<double>> by_tau;
  for (const auto& r : out.for_policy(0)) {
    for (const auto& s : r.episode_summaries) {
      if (s.start >= 50.0 && s.start <= 600.0 && std::isfinite(s.est_err_sq)) {
        by_tau[s.start].push_back(s.est_err_sq);
      }
    }
  }
  std::vector<double> taus;
  std::vector<double> med;
  for (auto& [tau, v] : by_tau) {
    taus.push_back(tau);
    med.push_back(median(v));
  }
  const double slope = log_log_slope(taus, med);
  return {slope >= kSlopeLo && slope <= kSlopeHi && secs < kLearningSeconds,
          "slope " + fmt("%.3f", slope) + " over " + std::to_string(taus.size()) +
              " episodes, learning runs " + fmt("%.1f s", secs)};
}

double checkpoint_value(const ExperimentResult& r, double t) {
  for (const auto& c : r.checkpoints) {
    if (c.time == t) return c.normalized_regret;
  }
  throw std::runtime_error("missing checkpoint");
}

Outcome regret_rate(const RegretOutput& out) {
  std::vector<double> at100, at600;
  for (const auto& r : out.for_policy(0)) {
    at100.push_back(checkpoint_value(r, 100.0));
    at600.push_back(checkpoint_value(r, 600.0));
  }
  const double m100 = median(at100);
  const double m600 = median(at600);
  return {m600 <= kRegretGrowth * m100,
          "median normalized regret " + fmt("%.4f", m100) + " at T=100, " + fmt("%.4f", m600) +
              " at T=600"};
}

double worst_at_horizon(const RegretOutput& out, std::size_t policy) {
  const Aggregate agg = aggregate(out.for_policy(policy));
  return agg.worst.back().normalized_regret;
}

Outcome baseline_comparison(const RegretOutput& out20) {
  const double ts = worst_at_horizon(out20, 0);
  const double re = worst_at_horizon(out20, 1);
  std::string detail = "20 seeds: TS worst " + fmt("%.4f", ts) + ", RE worst " + fmt("%.4f", re);
  if (ts <= re) return {true, detail};
  const RegretOutput out100 = learning_runs(100);
  const double ts100 = worst_at_horizon(out100, 0);
  const double re100 = worst_at_horizon(out100, 1);
  detail += "; 100 seeds: TS worst " + fmt("%.4f", ts100) + ", RE worst " + fmt("%.4f", re100);
  return {ts100 <= re100, detail};
}

Outcome zero_regret_oracle() {
  int nonzero = 0;
  int total = 0;
  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    const double horizon = 600.0;
    Rng rng = make_rng(1011, stream::kNoise);
    const Matrix inc =
        sample_wiener_increments(sc.noise, sc.dt, steps_for_horizon(horizon, sc.dt), rng);
    const TrajectoryLog a = run_optimal(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
    const TrajectoryLog b = run_optimal(sc.truth, sc.noise, sc.cost, horizon, sc.dt, inc);
    for (const auto& [t, r] : regret(a, b, default_checkpoints(horizon))) {
      ++total;
      if (r != 0.0) ++nonzero;
    }
  }
  return {nonzero == 0, std::to_string(total - nonzero) + "/" + std::to_string(total) +
                            " checkpoints exactly zero"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "lqts_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"stabilize", "stabilize --scenario x29a --tau-grid 2:6:2 --reps 16 --seed 3"},
      {"control",
       "control --scenario x29a --policy ts,rand-est,optimal --horizon 60 --reps 4 --seed 3"},
  };
  int mismatches = 0;
  for (const auto& [tag, args] : commands) {
    std::vector<std::string> outputs;
    for (int threads : {1, 8}) {
      for (int run = 0; run < 2; ++run) {
        const auto out = dir / (tag + "_" + std::to_string(threads) + "_" + std::to_string(run) +
                                ".csv");
        std::filesystem::remove(out);
        const std::string cmd = std::string("\"") + LQTS_CLI_PATH + "\" " + args +
                                " --threads " + std::to_string(threads) + " --out \"" +
                                out.string() + "\" 2>/dev/null";
        if (std::system(cmd.c_str()) != 0) {
          return {false, "command failed: " + cmd};
        }
        outputs.push_back(slurp(out));
      }
    }
    for (const auto& o : outputs) {
      if (o.empty() || o != outputs.front()) ++mismatches;
    }
  }
  std::filesystem::remove_all(dir);
  return {mismatches == 0,
          std::to_string(mismatches) + " mismatching CSVs across threads {1,8} x 2 runs"};
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());
  report(1, "CARE correctness", care_correctness);
  report(2, "closed-form CARE/Lyapunov", closed_forms);
  report(3, "Riccati directional derivative", riccati_derivative);
  report(4, "eigenvalue perturbation bound", perturbation_bound);
  report(5, "suboptimality dominance", suboptimality_dominance);
  report(6, "SDE fidelity", sde_fidelity);
  report(7, "stabilization sweep", stabilization_sweep);

  const auto t0 = std::chrono::steady_clock::now();
  RegretOutput runs;
  double learning_secs = 0.0;
  std::string learning_error;
  try {
    runs = learning_runs(20);
    learning_secs = seconds_since(t0);
  } catch (const std::exception& e) {
    learning_error = e.what();
  }
  auto guarded = [&](const std::function<Outcome()>& f) {
    return [&, f]() -> Outcome {
      if (!learning_error.empty()) return {false, "learning runs failed: " + learning_error};
      return f();
    };
  };
  report(8, "estimation rate", guarded([&] { return estimation_rate(runs, learning_secs); }));
  report(9, "regret rate", guarded([&] { return regret_rate(runs); }));
  report(10, "baseline comparison", guarded([&] { return baseline_comparison(runs); }));
  report(11, "zero-regret oracle", zero_regret_oracle);
  report(12, "CLI determinism", cli_determinism);

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
