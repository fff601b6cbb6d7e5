#pragma once

#include "lqts/types.hpp"

#include <complex>

namespace lqts {

/// e^M by scaling-and-squaring with a Pade approximant.
Matrix matrix_exponential(const Matrix& m);

/// Largest real part over the spectrum of a square matrix.
double max_real_eigenvalue(const Matrix& m);

/// True iff every eigenvalue has strictly negative real part.
bool is_hurwitz(const Matrix& m);

Eigen::VectorXcd eigenvalues(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Smallest eigenvalue of the symmetric part of m.
double min_sym_eigenvalue(const Matrix& m);
double max_sym_eigenvalue(const Matrix& m);

}  // namespace lqts
