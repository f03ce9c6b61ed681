#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lsqcert/dense_matrix.hpp"
#include "lsqcert/linalg.hpp"
#include "lsqcert/system.hpp"

namespace lsqcert {

/// A certificate step is degenerate when Tr(S_k P_k) <= this times ||x_k||^2
/// (the new snapshot lies in the span of the previous data, so the error
/// operator's closed form divides by zero). Fitting continues regardless via
/// pseudo-inverse truncation.
inline constexpr double kDegeneracyTolerance = 1e-12;

/// Batch least-squares fit: A_hat = Y * pinv(X).
DenseMatrix fit_batch(const SnapshotLog& log,
                      double rank_tolerance = kDefaultRankTolerance);

/// Online regression state. Feed snapshots one at a time; after each ingest
/// the estimate A_hat_k = Y_k pinv(X_k) is refreshed from a fresh SVD of X_k
/// and the SVD of X_{k-1} is retained for error certification.
class RegressionState {
public:
    explicit RegressionState(std::vector<double> x0,
                             double rank_tolerance = kDefaultRankTolerance);

    /// Appends the next snapshot (x_{t+1} = A x_t, supplied by a simulator
    /// or an external stream) and refreshes the estimate and SVD caches.
    void ingest(std::span<const double> x_next);

    /// Step index k; -1 until the first ingest.
    int step() const { return step_; }

    const SnapshotLog& log() const { return log_; }
    double rank_tolerance() const { return rank_tolerance_; }

    /// A_hat_k; requires step() >= 0.
    const DenseMatrix& estimate() const;

    /// SVD of X_k; requires step() >= 0.
    const SvdFactors& svd_current() const;

    /// SVD of X_{k-1} (the certificate's U_{k-1}); requires step() >= 1.
    const SvdFactors& svd_previous() const;

    /// numeric_rank(X_j) for j = 0..k.
    const std::vector<std::size_t>& rank_history() const { return rank_history_; }

private:
    SnapshotLog log_;
    double rank_tolerance_;
    int step_ = -1;
    std::optional<SvdFactors> svd_prev_;
    std::optional<SvdFactors> svd_curr_;
    DenseMatrix estimate_;
    std::vector<std::size_t> rank_history_;
};

/// Per-step error certificate: the projector S_k = I - U_{k-1} U_{k-1}',
/// the rank-one snapshot covariance P_k = x_k x_k', the error operator
/// E_k = (I - S_k P_k / Tr(S_k P_k)) S_k with its spectral bound
/// ||I - S_k P_k / Tr(S_k P_k)||_2, and the empirical errors against the
/// true matrix. E and the bound are absent on degenerate steps.
struct ErrorCertificate {
    std::size_t k = 0;
    DenseMatrix s;
    DenseMatrix p;
    double trace_sp = 0.0;
    bool degenerate = false;
    std::optional<DenseMatrix> error_operator;
    std::optional<double> thm1_bound;
    double empirical_spectral = 0.0;
    double empirical_frobenius = 0.0;
};

/// Requires step() >= 1 (there must be an X_{k-1}). The truth matrix is an
/// analysis input only; fitting never sees it.
ErrorCertificate error_certificate(const RegressionState& state, const LtiSystem& truth);

/// A - A_hat_k evaluated from spectral data only:
/// A (I - S_k Q Lambda^k nu nu' Lambda^k Q' / ||S_k Q Lambda^k nu||^2) S_k.
/// Returns nullopt when ||S_k Q Lambda^k nu|| is below the degeneracy
/// threshold. Requires a symmetric truth.
std::optional<DenseMatrix> lemma1_difference(const LtiSystem& truth,
                                             const InitialCondition& ic,
                                             const RegressionState& state);

}  // namespace lsqcert
