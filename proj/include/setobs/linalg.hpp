#pragma once

#include "setobs/types.hpp"

#include <complex>

namespace setobs::linalg {

/// Full SVD M = U * diag(singular) * V^T with a fixed sign convention:
/// singular values nonincreasing, and every column of U (and of the
/// trailing null-space columns of V) has its first nonzero entry positive.
/// For the leading min(rows, cols) pairs the right vector is flipped
/// together with the left one.
struct Svd {
    Matrix U;
    Vector singular;
    Matrix V;
};

Svd full_svd(const Matrix& M);

/// Number of singular values above rank_tol * sigma_max.
Index numerical_rank(const Matrix& M, double rank_tol = kDefaultRankTol);
Index numerical_rank(const Eigen::MatrixXcd& M, double rank_tol);

/// Moore-Penrose pseudoinverse with the same relative cutoff as numerical_rank.
Matrix pinv(const Matrix& M, double rank_tol = kDefaultRankTol);

/// Induced 2-norm; zero for empty matrices.
double spectral_norm(const Matrix& M);

double spectral_radius(const Matrix& M);

/// Smallest eigenvalue of the symmetric part of M.
double min_eigenvalue(const Matrix& M);

double condition_number(const Matrix& M);

bool all_finite(const Matrix& M);

std::vector<std::complex<double>> eigenvalues(const Matrix& A);

}  // namespace setobs::linalg
