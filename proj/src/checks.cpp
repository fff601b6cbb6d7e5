#include "lqts/checks.hpp"

#include "lqts/linalg.hpp"
#include "lqts/posterior.hpp"
#include "lqts/riccati.hpp"
#include "lqts/scenario.hpp"
#include "lqts/sde.hpp"

#include <cmath>
#include <sstream>

namespace lqts {

namespace {

template <class T>
std::string str(const T& v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

CheckResult result(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

// Random stabilizable pair: Gaussian entries are controllable with
// probability one; pairs the solver rejects are skipped.
DriftParams random_drift(Index p, Index q, Rng& rng) {
  return DriftParams(standard_normal(p, p, rng), standard_normal(p, q, rng));
}

Matrix random_stable(Index p, Rng& rng) {
  Matrix m = standard_normal(p, p, rng);
  const double shift = max_real_eigenvalue(m);
  return m - (shift + 0.5) * Matrix::Identity(p, p);
}

std::vector<CheckResult> riccati_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(seed, 11);

  {
    const DriftParams d(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    const CostSpec c(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    const RiccatiSolution s = solve_care(d, c);
    const double err = std::max({std::abs(s.K(0, 0) - 1.0), std::abs(s.gain(0, 0) + 1.0)});
    out.push_back(result("scalar CARE K=1, G=-1", err <= 1e-12, "error " + str(err)));
  }
  {
    const DriftParams d(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const CostSpec c(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const double err =
        (solve_care(d, c).K - (std::sqrt(2.0) - 1.0) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
    out.push_back(result("decoupled CARE K=(sqrt2-1)I", err <= 1e-12, "error " + str(err)));
  }

  for (const auto& name : builtin_scenario_names()) {
    const Scenario sc = builtin_scenario(name);
    const RiccatiSolution s = solve_care(sc.truth, sc.cost);
    const bool ok = s.residual <= 1e-8 && s.margin > 0.0 &&
                    (s.K - s.K.transpose()).cwiseAbs().maxCoeff() <= 1e-10 &&
                    min_sym_eigenvalue(s.K) >= -1e-10;
    out.push_back(result("CARE on " + name, ok,
                         "residual " + str(s.residual) + ", margin " + str(s.margin)));
  }

  int solved = 0;
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    const Index p = 2 + static_cast<Index>(i % 5);
    const Index q = 1 + static_cast<Index>(i % p);
    const DriftParams d = random_drift(p, q, rng);
    const CostSpec c(Matrix::Identity(p, p), Matrix::Identity(q, q));
    try {
      const RiccatiSolution s = solve_care(d, c);
      ++solved;
      if (!(s.residual <= 1e-8 && s.margin > 0.0)) ++bad;
    } catch (const SolverError&) {
    }
  }
  out.push_back(result("CARE on 100 random systems", bad == 0 && solved >= 95,
                       str(solved) + " solved, " + str(bad) + " violations"));

  int dominated = 0;
  const Scenario x = builtin_scenario("x29a");
  const RiccatiSolution opt = solve_care(x.truth, x.cost);
  int tried = 0;
  while (tried < 100) {
    const Matrix gain = opt.gain + 0.3 * standard_normal(x.q(), x.p(), rng);
    if (!is_hurwitz(x.truth.A + x.truth.B * gain)) continue;
    ++tried;
    if (min_sym_eigenvalue(cost_of_feedback(x.truth, x.cost, gain) - opt.K) >= -1e-8) {
      ++dominated;
    }
  }
  out.push_back(result("suboptimal feedback costs dominate K", dominated == tried,
                       str(dominated) + "/" + str(tried)));

  {
    const CostSpec scaled(7.0 * x.cost.Qx, 7.0 * x.cost.Qu);
    const RiccatiSolution s = solve_care(x.truth, scaled);
    const double dk = (s.K - 7.0 * opt.K).cwiseAbs().maxCoeff() / opt.K.cwiseAbs().maxCoeff();
    const double dg = (s.gain - opt.gain).cwiseAbs().maxCoeff();
    out.push_back(result("gain invariant under cost scaling", dk <= 1e-9 && dg <= 1e-9,
                         "K rel " + str(dk) + ", G abs " + str(dg)));
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      Matrix dA = standard_normal(x.p(), x.p(), rng);
      Matrix dB = standard_normal(x.p(), x.q(), rng);
      const double norm = std::sqrt(dA.squaredNorm() + dB.squaredNorm());
      dA /= norm;
      dB /= norm;
      const double eps = 1e-6;
      const RiccatiSolution hi =
          solve_care(DriftParams(x.truth.A + eps * dA, x.truth.B + eps * dB), x.cost);
      const RiccatiSolution lo =
          solve_care(DriftParams(x.truth.A - eps * dA, x.truth.B - eps * dB), x.cost);
      const Matrix fd = (hi.K - lo.K) / (2 * eps);
      const Matrix dK = riccati_directional_derivative(x.truth, opt, dA, dB);
      worst = std::max(worst, (fd - dK).norm() / dK.norm());
      const Matrix fd_bk =
          ((x.truth.B + eps * dB).transpose() * hi.K - (x.truth.B - eps * dB).transpose() * lo.K) /
          (2 * eps);
      const Matrix dbk = feedback_directional_derivative(x.truth, x.cost, dA, dB);
      worst = std::max(worst, (fd_bk - dbk).norm() / dbk.norm());
    }
    out.push_back(
        result("directional derivatives match central differences", worst <= 1e-4,
               "worst relative error " + str(worst)));
  }
  return out;
}

std::vector<CheckResult> posterior_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(seed, 12);
  const Index p = 3;
  const Index q = 2;
  const DriftParams truth(random_stable(p, rng), standard_normal(p, q, rng));
  const NoiseSpec noise(0.25 * Matrix::Identity(p, p));
  const CostSpec cost(Matrix::Identity(p, p), Matrix::Identity(q, q));
  const double dt = 1e-2;
  const double horizon = 200.0;
  const Index n = steps_for_horizon(horizon, dt);
  const Matrix inc = sample_wiener_increments(noise, dt, n, rng);
  // Piecewise-constant excitation, one level per unit time.
  DitherSignal dither = DitherSignal::gaussian(q, 1.0, static_cast<Index>(horizon), horizon, dt, rng);
  const TrajectoryLog log = simulate_feedback(truth, noise, cost, Matrix::Zero(q, p), dither,
                                              Vector::Zero(p), horizon, dt, inc);

  PosteriorState whole = init_prior(p, q);
  whole.accumulate(log, 0, n);
  PosteriorState chunks = init_prior(p, q);
  double prev_min = min_sym_eigenvalue(chunks.precision());
  double prev_logdet = log_det_spd(chunks.precision());
  bool monotone = true;
  for (Index k = 0; k < n;) {
    const Index len = std::min<Index>(n - k, 1 + (k * 7919) % 1237);
    chunks.accumulate(log, k, k + len);
    k += len;
    const double m = min_sym_eigenvalue(chunks.precision());
    const double ld = log_det_spd(chunks.precision());
    monotone = monotone && m >= prev_min * (1 - 1e-12) && ld >= prev_logdet - 1e-12;
    prev_min = m;
    prev_logdet = ld;
  }
  out.push_back(result("information is monotone", monotone, "over chunked accumulation"));
  const bool equal = whole.precision() == chunks.precision() &&
                     whole.cross_moment() == chunks.cross_moment();
  out.push_back(result("chunked accumulation is bit-equal", equal, ""));

  const PosteriorMoments mom = posterior_mean_cov(whole);
  const double err = estimation_error(mom.mean, truth.stacked());
  Eigen::SelfAdjointEigenSolver<Matrix> es(mom.precision);
  const double radius = 5.0 / std::sqrt(es.eigenvalues().minCoeff()) *
                        std::sqrt(static_cast<double>(p * (p + q)) * std::log(horizon));
  out.push_back(result("posterior mean within the concentration radius", err <= radius,
                       "error " + str(err) + ", radius " + str(radius)));

  {
    const PosteriorState prior = init_prior(2, 1);
    Matrix sum = Matrix::Zero(3, 3);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const Matrix s = sample_posterior(prior, rng);
      sum += s * s.transpose();
    }
    // Two independent columns, each N(0, I).
    const double dev = (sum / (2.0 * draws) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff();
    out.push_back(result("prior samples have identity column covariance", dev <= 0.02,
                         "max deviation " + str(dev)));
  }
  return out;
}

std::vector<CheckResult> perturbation_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(seed, 13);
  int dominated = 0;
  int total = 0;
  double worst_ratio = 0.0;
  while (total < 1000) {
    const Matrix M = standard_normal(4, 4, rng);
    if (!(eigenvector_condition(M) < 1e4)) continue;
    const Matrix E = std::pow(10.0, -2.0 + 2.0 * (total % 5) / 4.0) * standard_normal(4, 4, rng);
    const double shift = std::abs(max_real_eigenvalue(M + E) - max_real_eigenvalue(M));
    const double bound = eig_perturbation_bound(M, E);
    ++total;
    if (bound >= shift) ++dominated;
    worst_ratio = std::max(worst_ratio, shift / bound);
  }
  out.push_back(result("eigenvalue shift bound dominates", dominated == total,
                       str(dominated) + "/" + str(total) + ", max shift/bound " + str(worst_ratio)));

  const Scenario x = builtin_scenario("x29a");
  const RiccatiSolution base = solve_care(x.truth, x.cost);
  // Lipschitz constant from the largest directional derivative over a probe set.
  double lipschitz = 0.0;
  for (int i = 0; i < 20; ++i) {
    Matrix dA = standard_normal(x.p(), x.p(), rng);
    Matrix dB = standard_normal(x.p(), x.q(), rng);
    const double norm = std::sqrt(dA.squaredNorm() + dB.squaredNorm());
    lipschitz = std::max(
        lipschitz, riccati_directional_derivative(x.truth, base, dA / norm, dB / norm).norm());
  }
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Matrix dA = standard_normal(x.p(), x.p(), rng);
    Matrix dB = standard_normal(x.p(), x.q(), rng);
    const double norm = std::sqrt(dA.squaredNorm() + dB.squaredNorm());
    const double size = 1e-2 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    dA *= size / norm;
    dB *= size / norm;
    const Matrix K = solve_care(DriftParams(x.truth.A + dA, x.truth.B + dB), x.cost).K;
    const double ratio = (K - base.K).norm() / (lipschitz * size);
    worst = std::max(worst, ratio);
    if (ratio > 2.0) ++violations;
  }
  out.push_back(result("Riccati solution is locally Lipschitz", violations == 0,
                       "L " + str(lipschitz) + ", worst ratio " + str(worst)));
  return out;
}

std::vector<CheckResult> sde_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(seed, 14);

  {
    const Matrix M = standard_normal(4, 4, rng);
    Matrix term = Matrix::Identity(4, 4);
    Matrix sum = term;
    for (int k = 1; k < 100; ++k) {
      term = term * M / k;
      sum += term;
    }
    const double err = (matrix_exponential(M) - sum).norm() / sum.norm();
    out.push_back(result("matrix exponential matches Taylor series", err <= 1e-9,
                         "relative error " + str(err)));
  }

  {
    const DriftParams d(Matrix{{-1.0, 0.5}, {-0.3, -0.8}}, Matrix::Zero(2, 1));
    const Vector x0 = Vector::Ones(2);
    const Vector exact = matrix_exponential(d.A * 2.0) * x0;
    double errs[2];
    for (int level = 0; level < 2; ++level) {
      const double dt = level == 0 ? 1e-2 : 5e-3;
      Vector x = x0;
      const Index n = steps_for_horizon(2.0, dt);
      for (Index k = 0; k < n; ++k) x = euler_step(x, Vector::Zero(1), d, Vector::Zero(2), dt);
      errs[level] = (x - exact).norm();
    }
    const double ratio = errs[1] / errs[0];
    out.push_back(result("Euler scheme converges at first order", ratio >= 0.4 && ratio <= 0.6,
                         "error ratio " + str(ratio)));
  }

  {
    const NoiseSpec noise(Matrix{{1.0, 0.3}, {0.3, 0.5}});
    const double dt = 0.01;
    const Index n = 200000;
    const Matrix inc = sample_wiener_increments(noise, dt, n, rng);
    const Matrix cov = inc * inc.transpose() / (static_cast<double>(n) * dt);
    const double dev = (cov - noise.C).norm() / noise.C.norm();
    double lag = 0.0;
    for (Index i = 0; i < 2; ++i) {
      const Vector a = inc.row(i).head(n - 1).transpose();
      const Vector b = inc.row(i).tail(n - 1).transpose();
      lag = std::max(lag, std::abs(a.dot(b)) / std::sqrt(a.squaredNorm() * b.squaredNorm()));
    }
    out.push_back(result("Wiener increments have covariance dt C", dev <= 0.02,
                         "relative deviation " + str(dev)));
    out.push_back(result("Wiener increments are uncorrelated across steps",
                         lag <= 3.0 / std::sqrt(static_cast<double>(n)),
                         "lag-1 correlation " + str(lag)));
  }

  {
    const DriftParams d(Matrix{{-1.0, 0.0}, {0.0, -2.0}}, Matrix::Zero(2, 1));
    const NoiseSpec noise(Matrix::Identity(2, 2));
    const CostSpec cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    const double dt = 1e-3;
    const double horizon = 200.0;
    const Index n = steps_for_horizon(horizon, dt);
    const Index burn = steps_for_horizon(10.0, dt);
    Matrix cov = Matrix::Zero(2, 2);
    double count = 0.0;
    for (int path = 0; path < 20; ++path) {
      const Matrix inc = sample_wiener_increments(noise, dt, n, rng);
      const TrajectoryLog log = simulate_feedback(d, noise, cost, Matrix::Zero(1, 2), std::nullopt,
                                                  Vector::Zero(2), horizon, dt, inc);
      for (Index k = burn; k <= n; k += 10) {
        cov += log.states().col(k) * log.states().col(k).transpose();
        count += 1.0;
      }
    }
    cov /= count;
    const Matrix target = ou_stationary_covariance(d.A, noise.C);
    const double dev = (cov - target).norm() / target.norm();
    out.push_back(result("OU sample covariance matches the Lyapunov solution", dev <= 0.10,
                         "relative Frobenius deviation " + str(dev)));
  }
  return out;
}

}  // namespace

std::vector<std::string> check_suite_names() {
  return {"riccati", "posterior", "perturbation", "sde"};
}

std::vector<CheckResult> run_check_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "riccati") return riccati_suite(seed);
  if (suite == "posterior") return posterior_suite(seed);
  if (suite == "perturbation") return perturbation_suite(seed);
  if (suite == "sde") return sde_suite(seed);
  throw ConfigError("unknown check suite '" + suite +
                    "' (expected riccati, posterior, perturbation or sde)");
}

}  // namespace lqts
