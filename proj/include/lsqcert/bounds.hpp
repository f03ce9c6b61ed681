#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsqcert/regression.hpp"
#include "lsqcert/system.hpp"

namespace lsqcert {

// Check tolerances shared by the report writer and the acceptance suite.
inline constexpr double kIdentityCheckTolerance = 1e-8;   // relative, Frobenius
inline constexpr double kDominanceSlack = 1e-9;           // additive
inline constexpr double kErrorFloorSpectralTolerance = 1e-8;   // relative
inline constexpr double kErrorFloorFrobeniusTolerance = 1e-7;  // absolute, squared
inline constexpr double kNullspaceResidualTolerance = 1e-9;

/// Upper bound on ||A - A_hat_k||_F^2 for a simple-spectrum symmetric system
/// with k < n:  (n - min{k, |nu| + min{|mu|, 1}}) lambda_1^2 - lambda_n^2.
/// `value` uses the singular-value reading (lambda_1 = max|lambda|,
/// lambda_n = smallest nonzero |lambda|); `signed_reading` uses the literal
/// lambda_max(A) / lambda_min(A).
struct SquaredErrorBound {
    double value = 0.0;
    double signed_reading = 0.0;
};

/// nullopt when a hypothesis fails (repeated eigenvalues, or k >= n).
std::optional<SquaredErrorBound> thm2_bound(const SpectralProfile& profile,
                                            const InitialCondition& ic, std::size_t k);

/// Rank law for generic x0: rank(X_k) = min(k+1, s).
std::size_t predicted_rank(const SpectralProfile& profile, std::size_t k);

/// Exact asymptotic error of the regression once k >= s, for systems with a
/// repeated eigenvalue: spectral error = lambda* and squared Frobenius error
/// = sum over repeated eigenvalues of (m(lambda)-1) lambda^2.
struct ErrorFloor {
    double spectral = 0.0;
    double frobenius = 0.0;
};

/// nullopt when every eigenvalue is simple.
std::optional<ErrorFloor> thm4_error(const SpectralProfile& profile);

/// Per repeated eigenvalue: its full eigenvector block (n x m), the part of
/// the data's left-nullspace basis lying in that eigenspace (n x (m-1)), and
/// the coupling block P_i = null_basis' * eigvecs ((m-1) x m), whose gram
/// lambda_i P_i' P_i has spectrum {0, lambda_i x (m-1)}.
struct EigenspaceBlock {
    double value = 0.0;
    std::size_t multiplicity = 0;
    DenseMatrix eigvecs;
    DenseMatrix null_basis;
    DenseMatrix coupling;
};

/// The SVD-vs-spectrum partition once rank(X_k) = s: U2 spans the orthogonal
/// complement of the data range and splits along the repeated eigenspaces.
/// `q1` holds one representative per distinct eigenvalue: the eigenvector
/// itself for simple eigenvalues, and for repeated ones the unit vector of
/// the eigenspace orthogonal to the nullspace block.
struct MultiplicityPartition {
    std::size_t ell = 0;  // number of repeated eigenvalues
    std::vector<EigenspaceBlock> blocks;
    DenseMatrix u2;  // n x (n-s)
    std::vector<double> lambda1;
    DenseMatrix q1;  // n x s
};

/// Requires a symmetric system with numeric_rank(X_k) = s.
MultiplicityPartition multiplicity_partition(const SpectralProfile& profile,
                                             const SvdFactors& svd_xk);

/// ||U2' Q1||_F; the theory says exactly zero.
double lemma3_residual(const DenseMatrix& u2, const DenseMatrix& q1);

/// One representative direction per distinct eigenvalue, taken from the data
/// side: the normalized projection of x0 onto each eigenspace. Independent
/// of the SVD, so it gives the nullspace-structure check real teeth.
DenseMatrix distinct_representatives(const SpectralProfile& profile,
                                     const InitialCondition& ic);

/// One theorem output with the violated hypothesis recorded when absent.
struct BoundField {
    std::optional<double> value;
    std::string na_reason;

    bool applicable() const { return value.has_value(); }
};

/// Everything the theory predicts for one step, joined with the observed
/// quantities. Absent fields name the hypothesis that failed.
struct BoundReport {
    std::size_t k = 0;
    std::size_t observed_rank = 0;
    std::optional<std::size_t> predicted_rank;
    std::string predicted_rank_na;
    std::optional<double> lambda_star;
    BoundField thm2;
    BoundField thm2_signed;
    BoundField thm4_spectral;
    BoundField thm4_frobenius;
    BoundField lemma3;
};

/// Requires state.step() >= 1 and a certificate for the same step. `ic` may
/// be absent (non-symmetric truth, or an x0 violating nu != 0); dependent
/// fields then carry the reason.
BoundReport bound_report(const LtiSystem& truth,
                         const std::optional<InitialCondition>& ic,
                         const RegressionState& state, const ErrorCertificate& cert);

}  // namespace lsqcert
