#pragma once

#include "lqts/types.hpp"

#include <optional>

namespace lqts {

/// Solution of A^T K + K A - K B Qu^{-1} B^T K + Qx = 0 together with the
/// derived optimal feedback.
struct RiccatiSolution {
  Matrix K;            // p x p, symmetric PSD
  Matrix gain;         // q x p, G = -Qu^{-1} B^T K
  Matrix closed_loop;  // p x p, D = A + B G
  double residual = 0.0;  // Frobenius norm of the CARE left-hand side
  double margin = 0.0;    // -max Re(lambda(D))
  int iterations = 0;
};

struct CareOptions {
  int max_iterations = 100;
  double residual_tol = 1e-8;
  double step_tol = 1e-10;  // relative to max(1, ||K||_F)
  /// Stabilizing initial feedback. When absent one is built by eigenvalue
  /// shifting (Bass' method).
  std::optional<Matrix> initial_gain;
};

/// Solves D^T P + P D + Q = 0 for stable D via the Kronecker-vectorized
/// system, with one step of iterative refinement. Throws StabilityError
/// when D is not Hurwitz.
Matrix solve_lyapunov(const Matrix& D, const Matrix& Q);

/// Frobenius norm of D^T P + P D + Q.
double lyapunov_residual(const Matrix& D, const Matrix& P, const Matrix& Q);

double care_residual(const DriftParams& drift, const CostSpec& cost, const Matrix& K);

/// Newton-Kleinman iteration. Throws SolverError when the pair looks
/// non-stabilizable or the budget runs out.
RiccatiSolution solve_care(const DriftParams& drift, const CostSpec& cost,
                           const CareOptions& options = {});

/// A gain G with A + B G Hurwitz, placed by shifting the spectrum left of
/// -shift. Throws SolverError when (A, B) is not controllable enough for
/// the construction.
Matrix shifted_stabilizing_gain(const DriftParams& drift, double shift_margin = 1.0);

/// -max Re(lambda(D)); positive iff D is Hurwitz.
double stability_margin(const Matrix& D);

/// Upper bound on the growth of the largest real part of the spectrum of
/// M when E is added, for diagonalizable M: max(1, ||E||_2 kappa(Gamma))
/// with Gamma the eigenvector matrix. Throws ConditioningError when
/// kappa(Gamma) >= max_condition.
double eig_perturbation_bound(const Matrix& M, const Matrix& E,
                              double max_condition = 1e8);

/// Condition number of the (unit-column) eigenvector matrix of M.
double eigenvector_condition(const Matrix& M);

/// Derivative of K(theta) along the direction (dA, dB): the solution of
/// D^T dK + dK D + K N + N^T K = 0 with N = dA + dB G.
Matrix riccati_directional_derivative(const DriftParams& drift, const CostSpec& cost,
                                      const Matrix& dA, const Matrix& dB);
Matrix riccati_directional_derivative(const DriftParams& drift, const RiccatiSolution& care,
                                      const Matrix& dA, const Matrix& dB);

/// Derivative of B^T K(theta) along (dA, dB), shaped q x p like the gain.
Matrix feedback_directional_derivative(const DriftParams& drift, const CostSpec& cost,
                                       const Matrix& dA, const Matrix& dB);

/// Value matrix P of an arbitrary stabilizing feedback u = G x:
/// (A+BG)^T P + P (A+BG) + Qx + G^T Qu G = 0. The long-run average cost of
/// the feedback under noise covariance C is tr(P C).
Matrix cost_of_feedback(const DriftParams& drift, const CostSpec& cost, const Matrix& gain);

}  // namespace lqts
