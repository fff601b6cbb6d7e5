#include "lqts/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace lqts {

namespace {

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_spd(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError(what + " must be square and non-empty, got " + dims(m));
  }
  if (!m.allFinite()) throw ValidationError(what + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError(what + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= kSpdTolerance) {
    std::ostringstream os;
    os << what << " is not positive definite (min eigenvalue "
       << es.eigenvalues().minCoeff() << ")";
    throw ValidationError(os.str());
  }
}

DriftParams::DriftParams(Matrix a, Matrix b) : A(std::move(a)), B(std::move(b)) {
  validate();
}

void DriftParams::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw ShapeError("drift A must be square p x p with p >= 1, got " + dims(A));
  }
  if (B.rows() != A.rows() || B.cols() < 1) {
    throw ShapeError("drift B must be p x q with q >= 1, got " + dims(B) +
                     " for p=" + std::to_string(A.rows()));
  }
  if (!A.allFinite() || !B.allFinite()) {
    throw ValidationError("drift matrices have non-finite entries");
  }
}

Matrix DriftParams::stacked() const {
  Matrix theta(p() + q(), p());
  theta.topRows(p()) = A.transpose();
  theta.bottomRows(q()) = B.transpose();
  return theta;
}

DriftParams DriftParams::from_stacked(const Matrix& theta, Index p, Index q) {
  if (theta.rows() != p + q || theta.cols() != p) {
    throw ShapeError("stacked parameter must be (p+q) x p, got " + dims(theta));
  }
  return DriftParams(theta.topRows(p).transpose(), theta.bottomRows(q).transpose());
}

NoiseSpec::NoiseSpec(Matrix c) : C(std::move(c)) { validate(); }

void NoiseSpec::validate() const { require_spd(C, "noise covariance C"); }

Matrix NoiseSpec::cholesky_factor() const {
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("noise covariance C has no Cholesky factor");
  }
  return llt.matrixL();
}

CostSpec::CostSpec(Matrix qx, Matrix qu) : Qx(std::move(qx)), Qu(std::move(qu)) {
  validate();
}

void CostSpec::validate() const {
  require_spd(Qx, "state cost Qx");
  require_spd(Qu, "input cost Qu");
}

double CostSpec::stage_cost(const Vector& x, const Vector& u) const {
  return x.dot(Qx * x) + u.dot(Qu * u);
}

}  // namespace lqts
