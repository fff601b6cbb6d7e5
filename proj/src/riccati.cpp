#include "lqts/riccati.hpp"

#include "lqts/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lqts {

namespace {

bool is_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void require_square(const Matrix& m, Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << what << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
    throw ShapeError(os.str());
  }
}

Matrix gain_from_value(const DriftParams& drift, const Eigen::LLT<Matrix>& qu_llt,
                       const Matrix& K) {
  return -qu_llt.solve(drift.B.transpose() * K);
}

}  // namespace

Matrix solve_lyapunov(const Matrix& D, const Matrix& Q) {
  const Index n = D.rows();
  require_square(D, n, "Lyapunov matrix D");
  require_square(Q, n, "Lyapunov right-hand side Q");
  if (!is_hurwitz(D)) {
    std::ostringstream os;
    os << "Lyapunov solve needs a stable matrix; max real eigenvalue is "
       << (D.allFinite() ? max_real_eigenvalue(D) : NAN);
    throw StabilityError(os.str());
  }

  // (I kron D^T + D^T kron I) vec(P) = -vec(Q), column-major vec.
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Dt = D.transpose();
  const Matrix L = kronecker(I, Dt) + kronecker(Dt, I);
  Eigen::PartialPivLU<Matrix> lu(L);

  Vector rhs = -Eigen::Map<const Vector>(Q.data(), n * n);
  Vector x = lu.solve(rhs);
  // One refinement step recovers the digits lost to the n^2 x n^2 solve.
  const Vector r = rhs - L * x;
  x += lu.solve(r);

  Matrix P = Eigen::Map<Matrix>(x.data(), n, n);
  if (is_symmetric(Q)) P = symmetrized(P);
  return P;
}

double lyapunov_residual(const Matrix& D, const Matrix& P, const Matrix& Q) {
  return (D.transpose() * P + P * D + Q).norm();
}

double care_residual(const DriftParams& drift, const CostSpec& cost, const Matrix& K) {
  const Matrix& A = drift.A;
  const Matrix& B = drift.B;
  const Matrix BtK = B.transpose() * K;
  const Matrix lhs =
      A.transpose() * K + K * A - BtK.transpose() * cost.Qu.llt().solve(BtK) + cost.Qx;
  return lhs.norm();
}

Matrix shifted_stabilizing_gain(const DriftParams& drift, double shift_margin) {
  drift.validate();
  const Index p = drift.p();
  // beta makes A + beta I anti-stable; the closed loop then satisfies
  // D P + P D^T = -2 beta P and has every eigenvalue left of -beta.
  const double beta = std::max(0.0, -eigenvalues(drift.A).real().minCoeff()) + shift_margin;
  const Matrix shifted = drift.A + beta * Matrix::Identity(p, p);
  // The Gramian below is PSD, and definite exactly when (A, B) is
  // controllable.
  Matrix gramian;
  try {
    gramian = solve_lyapunov(-shifted.transpose(), 2.0 * drift.B * drift.B.transpose());
  } catch (const StabilityError& e) {
    throw SolverError(std::string("initial gain construction failed: ") + e.what(), NAN);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gramian);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 1e-13 * std::max(hi, 1e-300))) {
    throw SolverError("(A, B) is not controllable enough to build an initial stabilizer",
                      NAN);
  }
  Matrix gain = -drift.B.transpose() * es.eigenvectors() *
                es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  if (!is_hurwitz(drift.A + drift.B * gain)) {
    throw SolverError("shifted initial gain does not stabilize (A, B)", NAN);
  }
  return gain;
}

RiccatiSolution solve_care(const DriftParams& drift, const CostSpec& cost,
                           const CareOptions& options) {
  drift.validate();
  cost.validate();
  if (cost.p() != drift.p() || cost.q() != drift.q()) {
    throw ShapeError("cost weights do not match drift dimensions");
  }
  const Eigen::LLT<Matrix> qu_llt(cost.Qu);

  Matrix gain;
  if (options.initial_gain) {
    gain = *options.initial_gain;
    if (gain.rows() != drift.q() || gain.cols() != drift.p()) {
      throw ShapeError("initial gain must be q x p");
    }
  } else {
    gain = shifted_stabilizing_gain(drift);
  }

  Matrix K = Matrix::Zero(drift.p(), drift.p());
  double residual = INFINITY;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Matrix D = drift.A + drift.B * gain;
    if (!is_hurwitz(D)) {
      throw SolverError("Newton-Kleinman iterate lost stability; pair is not stabilizable",
                        residual);
    }
    const Matrix K_next =
        solve_lyapunov(D, cost.Qx + gain.transpose() * cost.Qu * gain);
    const double step = (K_next - K).norm();
    K = K_next;
    gain = gain_from_value(drift, qu_llt, K);
    residual = care_residual(drift, cost, K);
    if (!std::isfinite(residual)) break;
    if (residual <= options.residual_tol &&
        step <= options.step_tol * std::max(1.0, K.norm())) {
      ++it;
      break;
    }
  }
  if (!(residual <= options.residual_tol)) {
    std::ostringstream os;
    os << "CARE did not converge after " << it << " iterations (residual " << residual << ")";
    throw SolverError(os.str(), residual);
  }

  RiccatiSolution sol;
  sol.K = K;
  sol.gain = gain;
  sol.closed_loop = drift.A + drift.B * gain;
  sol.residual = residual;
  sol.margin = stability_margin(sol.closed_loop);
  sol.iterations = it;
  if (!(sol.margin > 0.0)) {
    throw SolverError("CARE solution does not stabilize the closed loop", residual);
  }
  return sol;
}

double stability_margin(const Matrix& D) { return -max_real_eigenvalue(D); }

double eigenvector_condition(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M);
  Eigen::MatrixXcd V = es.eigenvectors();
  for (Index j = 0; j < V.cols(); ++j) V.col(j).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return INFINITY;
  return s(0) / smin;
}

double eig_perturbation_bound(const Matrix& M, const Matrix& E, double max_condition) {
  require_square(M, M.rows(), "M");
  require_square(E, M.rows(), "E");
  const double kappa = eigenvector_condition(M);
  if (!(kappa < max_condition)) {
    std::ostringstream os;
    os << "matrix is numerically defective (eigenvector condition " << kappa
       << "); only the diagonalizable case is supported";
    throw ConditioningError(os.str());
  }
  return std::max(1.0, spectral_norm(E) * kappa);
}

Matrix riccati_directional_derivative(const DriftParams& drift, const RiccatiSolution& care,
                                      const Matrix& dA, const Matrix& dB) {
  require_square(dA, drift.p(), "direction dA");
  if (dB.rows() != drift.p() || dB.cols() != drift.q()) {
    throw ShapeError("direction dB must be p x q");
  }
  const Matrix N = dA + dB * care.gain;
  const Matrix forcing = care.K * N + N.transpose() * care.K;
  return solve_lyapunov(care.closed_loop, forcing);
}

Matrix riccati_directional_derivative(const DriftParams& drift, const CostSpec& cost,
                                      const Matrix& dA, const Matrix& dB) {
  return riccati_directional_derivative(drift, solve_care(drift, cost), dA, dB);
}

Matrix feedback_directional_derivative(const DriftParams& drift, const CostSpec& cost,
                                       const Matrix& dA, const Matrix& dB) {
  const RiccatiSolution care = solve_care(drift, cost);
  const Matrix dK = riccati_directional_derivative(drift, care, dA, dB);
  return dB.transpose() * care.K + drift.B.transpose() * dK;
}

Matrix cost_of_feedback(const DriftParams& drift, const CostSpec& cost, const Matrix& gain) {
  if (gain.rows() != drift.q() || gain.cols() != drift.p()) {
    throw ShapeError("feedback gain must be q x p");
  }
  const Matrix D = drift.A + drift.B * gain;
  return solve_lyapunov(D, cost.Qx + gain.transpose() * cost.Qu * gain);
}

}  // namespace lqts
