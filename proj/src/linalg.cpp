#include "lqts/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace lqts {

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("matrix_exponential needs a square matrix");
  if (m.size() == 0) return m;
  return m.exp();
}

Eigen::VectorXcd eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("eigenvalues need a square matrix");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

double max_real_eigenvalue(const Matrix& m) {
  return eigenvalues(m).real().maxCoeff();
}

bool is_hurwitz(const Matrix& m) {
  if (!m.allFinite()) return false;
  return max_real_eigenvalue(m) < 0.0;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double min_sym_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_sym_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace lqts
