#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lqts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. Everything derives from std::runtime_error so callers that
// only care about "it failed" can catch one type.

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PairingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the Riccati solver. Carries the residual of the last iterate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Drift of the controlled diffusion dx = (A x + B u) dt + dW.
struct DriftParams {
  Matrix A;  // p x p
  Matrix B;  // p x q

  DriftParams() = default;
  DriftParams(Matrix a, Matrix b);

  Index p() const { return A.rows(); }
  Index q() const { return B.cols(); }

  /// Stacked parameter theta = [A, B]^T, shape (p+q) x p.
  Matrix stacked() const;
  static DriftParams from_stacked(const Matrix& theta, Index p, Index q);

  /// Throws ShapeError / ValidationError when the invariants do not hold.
  void validate() const;
};

/// Stationary covariance (per unit time) of the driving Wiener process.
struct NoiseSpec {
  Matrix C;

  NoiseSpec() = default;
  explicit NoiseSpec(Matrix c);

  Index p() const { return C.rows(); }
  void validate() const;
  /// Lower-triangular L with L L^T = C.
  Matrix cholesky_factor() const;
};

/// Quadratic cost weights in canonical form (no state/input cross term).
struct CostSpec {
  Matrix Qx;  // p x p
  Matrix Qu;  // q x q

  CostSpec() = default;
  CostSpec(Matrix qx, Matrix qu);

  Index p() const { return Qx.rows(); }
  Index q() const { return Qu.rows(); }
  void validate() const;

  /// z^T Q z for z = [x; u] without forming the block matrix.
  double stage_cost(const Vector& x, const Vector& u) const;
};

inline constexpr double kSpdTolerance = 1e-12;

/// Throws ValidationError unless m is symmetric (relative 1e-10) with
/// smallest eigenvalue above kSpdTolerance.
void require_spd(const Matrix& m, const std::string& what);

bool all_finite(const Matrix& m);

}  // namespace lqts
