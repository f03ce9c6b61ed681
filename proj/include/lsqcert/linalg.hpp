#pragma once

#include <cstddef>
#include <vector>

#include "lsqcert/dense_matrix.hpp"

namespace lsqcert {

/// Default relative rank threshold: singular values at or below
/// 1e-9 * sigma_max count as zero. Relative so that rank decisions survive
/// rescaling of the initial state.
inline constexpr double kDefaultRankTolerance = 1e-9;

/// Economic SVD truncated at the numeric-rank threshold. U is m x r with
/// orthonormal columns, V is n x r, singular values are positive and
/// nonincreasing. `rank_tolerance` is the absolute cut that produced r
/// (relative tolerance times the largest singular value).
struct SvdFactors {
    DenseMatrix u;
    std::vector<double> singular_values;
    DenseMatrix v;
    std::size_t numeric_rank = 0;
    double rank_tolerance = 0.0;

    /// U * diag(sigma) * V' (for reconstruction checks).
    DenseMatrix reconstruct() const;
};

/// One-sided Jacobi SVD. Keeps singular values strictly greater than
/// relative_tolerance * sigma_max; a zero matrix yields empty factors.
/// Throws InvalidInputError on non-finite input, NumericalError when the
/// sweep limit is hit.
SvdFactors svd(const DenseMatrix& m, double relative_tolerance = kDefaultRankTolerance);

/// Moore-Penrose pseudo-inverse V * inv(Sigma) * U' from the truncated SVD.
/// Rank-deficient inputs are handled by truncation, never by failure; the
/// pseudo-inverse of a zero matrix is the zero matrix (transposed shape).
DenseMatrix pseudo_inverse(const DenseMatrix& m,
                           double relative_tolerance = kDefaultRankTolerance);

/// Pseudo-inverse assembled from already-computed factors; `factors` must
/// come from svd() of the matrix in question.
DenseMatrix pseudo_inverse(const SvdFactors& factors);

/// Number of singular values exceeding relative_tolerance * sigma_max.
std::size_t numeric_rank(const DenseMatrix& m,
                         double relative_tolerance = kDefaultRankTolerance);

/// Largest singular value (0 for an all-zero or empty matrix).
double spectral_norm(const DenseMatrix& m);

/// sqrt(Tr(M'M)).
double frobenius_norm(const DenseMatrix& m);

/// Full symmetric eigendecomposition M = Q * diag(eigenvalues) * Q' with
/// eigenvalues in ascending order (zeros included) and orthonormal Q.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    DenseMatrix q;
};

/// Cyclic Jacobi eigensolver. Requires ||M - M'||_F <= 1e-10 * ||M||_F;
/// asymmetric input throws InvalidInputError.
EigenDecomposition symmetric_eigendecomposition(const DenseMatrix& m);

/// Orthonormal basis of the orthogonal complement of span(U), where U is
/// n x r with orthonormal columns. Returns n x (n-r).
DenseMatrix orthonormal_complement(const DenseMatrix& u);

/// X with A X = B, via LU with partial pivoting. Throws NumericalError when
/// A is numerically singular.
DenseMatrix solve_linear(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace lsqcert
