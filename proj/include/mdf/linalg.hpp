#pragma once

#include <span>
#include <vector>

namespace mdf {

// Dense symmetric eigendecomposition and the few small-matrix helpers the
// metrics need. Matrices are row-major, n x n.

struct SymEig {
  int n = 0;
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column j = eigenvector of values[j], vectors[i + n*j]
};

// Cyclic Jacobi. Intended for the modest dimensions of feature covariances.
SymEig sym_eig(std::span<const double> a, int n);

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-clamp_tol, 0) are clamped to zero; anything below -clamp_tol throws
// NumericError.
std::vector<double> sym_sqrt(std::span<const double> a, int n, double clamp_tol);

// Lower-triangular Cholesky factor; throws NumericError if not positive
// definite.
std::vector<double> cholesky(std::span<const double> a, int n);

// c = a * b, all n x n row-major.
std::vector<double> mat_mul(std::span<const double> a, std::span<const double> b, int n);

double trace(std::span<const double> a, int n);

}  // namespace mdf
