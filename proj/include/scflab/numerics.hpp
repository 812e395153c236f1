#pragma once

#include "scflab/core.hpp"

namespace scflab {

// A = vectors * values.asDiagonal() * vectors^T, values ascending.
struct EigDecomposition {
  Vec values;
  Mat vectors;
};

// B = left * singular.asDiagonal() * right^T, singular values descending, all >= 0.
struct SvdDecomposition {
  Mat left;
  Vec singular;
  Mat right;
};

// Cyclic Jacobi with threshold sweeps. Converges when the off-diagonal
// Frobenius norm drops below 1e-13 * ||A||_F; throws NumericFailure after
// 100 sweeps otherwise. No eigenvector sign or degeneracy canonicalization
// happens here; callers own those conventions.
EigDecomposition jacobi_eigh(const SymMatrix& a);

// SVD of a small square matrix via eigendecomposition of B^T B. The sign of
// each right singular vector is fixed (largest-magnitude entry positive) so
// repeated runs produce identical factors.
SvdDecomposition svd_small(const Mat& b);

// Inverse square root of a symmetric positive definite matrix (Lowdin
// orthonormalizer). Throws NearLinearDependence when the smallest eigenvalue
// falls below 1e-10.
Mat sqrt_inv_spd(const SymMatrix& s);

// F0(t) = int_0^1 exp(-t u^2) du for t >= 0.
double boys_f0(double t);

namespace detail {
// Error function via power series (|x| < 3) and the Laplace continued
// fraction for the complement (|x| >= 3).
double erf_split(double x);
}  // namespace detail

}  // namespace scflab
