#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsqcert/dense_matrix.hpp"
#include "lsqcert/linalg.hpp"

namespace lsqcert {

/// Two eigenvalues are treated as one (repeated) eigenvalue when their gap is
/// at or below this, scaled by max(1, |value|). Synthesized systems bypass
/// detection and carry the requested spectrum exactly.
inline constexpr double kEigenvalueClusterTolerance = 1e-8;

/// Spectral bookkeeping for a symmetric system matrix: the full spectrum in
/// descending-magnitude order with matching orthonormal eigenvectors
/// (nonzero eigenvalues first, nullspace last), the distinct values with
/// their multiplicities, and the largest repeated magnitude when one exists.
struct SpectralProfile {
    std::vector<double> eigenvalues;          // descending by |value|
    DenseMatrix q_full;                       // n x n, column i pairs with eigenvalues[i]
    std::vector<double> distinct_values;      // s cluster representatives, same order
    std::vector<std::size_t> multiplicities;  // per distinct value
    std::optional<double> lambda_star;        // max |value| among multiplicity > 1
    std::size_t rank = 0;                     // nonzero eigenvalues under the rank tolerance

    std::size_t dimension() const { return eigenvalues.size(); }
    std::size_t distinct_count() const { return distinct_values.size(); }
    bool all_simple() const { return !lambda_star.has_value(); }

    /// Eigenvectors of the nonzero eigenvalues (first `rank` columns).
    DenseMatrix range_eigenvectors() const { return q_full.columns(0, rank); }
    /// Nullspace eigenvectors (remaining columns).
    DenseMatrix null_eigenvectors() const {
        return q_full.columns(rank, dimension() - rank);
    }
    /// Eigenvector block of the i-th distinct value (n x multiplicity).
    DenseMatrix eigenspace(std::size_t distinct_index) const;
};

SpectralProfile make_spectral_profile(std::vector<double> eigenvalues, DenseMatrix q,
                                      double rank_tolerance, double cluster_tolerance);

/// Ground-truth discrete dynamics x_{t+1} = A x_t with the spectral profile
/// attached when A is symmetric.
class LtiSystem {
public:
    /// Detects symmetry (||A - A'||_F <= 1e-10 ||A||_F) and, when symmetric,
    /// derives the profile by eigendecomposition with multiplicity clustering.
    static LtiSystem from_matrix(DenseMatrix a,
                                 double rank_tolerance = kDefaultRankTolerance);

    /// Wraps an exactly-known symmetric system (profile supplied, not detected).
    static LtiSystem symmetric_with_profile(DenseMatrix a, SpectralProfile profile);

    const DenseMatrix& a() const { return a_; }
    std::size_t dimension() const { return a_.rows(); }
    bool symmetric() const { return symmetric_; }
    const std::optional<SpectralProfile>& spectral_profile() const { return profile_; }

private:
    LtiSystem(DenseMatrix a, bool symmetric, std::optional<SpectralProfile> profile)
        : a_(std::move(a)), symmetric_(symmetric), profile_(std::move(profile)) {}

    DenseMatrix a_;
    bool symmetric_ = false;
    std::optional<SpectralProfile> profile_;
};

/// x0 split along the eigenbasis: x0 = Q nu + Qbar mu, with nu on the
/// range eigenvectors and mu on the nullspace. nu must not vanish.
struct InitialCondition {
    std::vector<double> x0;
    std::vector<double> nu;   // length = profile rank
    std::vector<double> mu;   // length = n - rank
    std::size_t nnz_nu = 0;   // entries with |coef| > 1e-9 ||x0||
    std::size_t nnz_mu = 0;
};

/// The growing snapshot pair: X_k = [x0 .. x_k], Y_k = [x1 .. x_{k+1}].
/// Stores the raw snapshot sequence; X/Y are materialized views, so the
/// shift structure holds by construction.
class SnapshotLog {
public:
    explicit SnapshotLog(std::vector<double> x0);

    void append(std::vector<double> x_next);

    std::size_t state_dimension() const { return dim_; }
    std::size_t snapshot_count() const { return snapshots_.size(); }
    bool has_pairs() const { return snapshots_.size() >= 2; }

    /// Latest step index k (requires at least two snapshots).
    std::size_t k() const;

    std::span<const double> snapshot(std::size_t t) const;

    DenseMatrix x() const;  // n x (k+1)
    DenseMatrix y() const;  // n x (k+1)

    /// X_j for j <= k (prefix view).
    DenseMatrix x_prefix(std::size_t j) const;

private:
    std::size_t dim_;
    std::vector<std::vector<double>> snapshots_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Runs x_{t+1} = A x_t for `steps` steps from x0 (nonzero, finite). The log
/// holds x0 .. x_{steps+1}, i.e. X has columns x0 .. x_steps and Y is the
/// one-step shift.
SnapshotLog simulate(const LtiSystem& system, std::span<const double> x0,
                     std::size_t steps);

/// A = Q diag(spectrum) Q' with Q a seeded random orthogonal matrix. The
/// profile carries the requested spectrum exactly (no detection).
LtiSystem synthesize_symmetric(std::span<const double> spectrum, std::uint64_t seed);

/// nu = Q' x0 (range columns), mu = Qbar' x0. Throws InvalidInputError when
/// every nu entry is below the nonzero threshold (x0 orthogonal to range(A)).
InitialCondition decompose_initial_condition(const SpectralProfile& profile,
                                             std::span<const double> x0);

/// Laplacian of the weighted Petersen graph: outer 5-cycle, inner pentagram,
/// spokes i-(i+5) with weights 1..5, every other edge weight 1. Exact
/// integer arithmetic; rows sum to zero.
DenseMatrix weighted_petersen_laplacian();

/// A = exp(-generator * dt); the symmetric flag is inherited from the
/// generator and the profile is then derived by eigendecomposition.
LtiSystem discretize(const DenseMatrix& continuous_generator, double dt,
                     double rank_tolerance = kDefaultRankTolerance);

/// [V]_ij = values[i]^(j-1), one row per (distinct) eigenvalue. Duplicate
/// values under the cluster tolerance are rejected.
DenseMatrix vandermonde(std::span<const double> distinct_eigenvalues,
                        std::size_t columns);

/// X_k = Q_full * Gamma * V with Gamma = diag(alpha), alpha = (nu, mu)
/// ordered to match q_full, and V the n x (k+1) Vandermonde on the full
/// spectrum.
struct StructuralFactors {
    DenseMatrix gamma;        // n x n diagonal
    DenseMatrix vandermonde;  // n x (k+1)
};

StructuralFactors structural_factorization(const SpectralProfile& profile,
                                           const InitialCondition& ic, std::size_t k);

}  // namespace lsqcert
