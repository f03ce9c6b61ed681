#include "lsqcert/regression.hpp"

#include <cmath>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"

namespace lsqcert {

DenseMatrix fit_batch(const SnapshotLog& log, double rank_tolerance) {
    return kernels::multiply(log.y(), pseudo_inverse(log.x(), rank_tolerance));
}

RegressionState::RegressionState(std::vector<double> x0, double rank_tolerance)
    : log_(std::move(x0)), rank_tolerance_(rank_tolerance) {}

void RegressionState::ingest(std::span<const double> x_next) {
    log_.append(std::vector<double>(x_next.begin(), x_next.end()));
    ++step_;

    svd_prev_ = std::move(svd_curr_);
    svd_curr_ = svd(log_.x(), rank_tolerance_);
    estimate_ = kernels::multiply(log_.y(), pseudo_inverse(*svd_curr_));
    rank_history_.push_back(svd_curr_->numeric_rank);
}

const DenseMatrix& RegressionState::estimate() const {
    if (step_ < 0) throw InvalidInputError("RegressionState: no snapshots ingested yet");
    return estimate_;
}

const SvdFactors& RegressionState::svd_current() const {
    if (!svd_curr_) throw InvalidInputError("RegressionState: no snapshots ingested yet");
    return *svd_curr_;
}

const SvdFactors& RegressionState::svd_previous() const {
    if (!svd_prev_) {
        throw InvalidInputError("RegressionState: X_{k-1} requires step >= 1");
    }
    return *svd_prev_;
}

ErrorCertificate error_certificate(const RegressionState& state, const LtiSystem& truth) {
    if (state.step() < 1) {
        throw InvalidInputError("error_certificate: requires k >= 1");
    }
    if (truth.dimension() != state.log().state_dimension()) {
        throw InvalidInputError("error_certificate: dimension mismatch");
    }

    const std::size_t n = truth.dimension();
    const std::size_t k = static_cast<std::size_t>(state.step());

    ErrorCertificate cert;
    cert.k = k;

    const DenseMatrix& u_prev = state.svd_previous().u;
    cert.s = DenseMatrix::identity(n);
    if (u_prev.cols() > 0) cert.s -= kernels::multiply_a_bt(u_prev, u_prev);

    const std::span<const double> x_k = state.log().snapshot(k);
    cert.p = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) cert.p(i, j) = x_k[i] * x_k[j];
    }

    // Tr(S P) = x' S x = ||S x||^2 since S is a symmetric projector; the
    // norm form avoids the cancellation of the raw inner product when x_k
    // lies nearly inside span(X_{k-1}).
    const std::vector<double> y = matvec(cert.s, x_k);
    cert.trace_sp = dot(y, y);
    const double x_norm_sq = dot(x_k, x_k);
    cert.degenerate = cert.trace_sp <= kDegeneracyTolerance * x_norm_sq;

    if (!cert.degenerate) {
        // B = I - S P / Tr(S P); note S P = (S x) x'.
        DenseMatrix b = DenseMatrix::identity(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                b(i, j) -= y[i] * x_k[j] / cert.trace_sp;
            }
        }
        cert.error_operator = kernels::multiply(b, cert.s);
        cert.thm1_bound = spectral_norm(b);
    }

    const DenseMatrix diff = truth.a() - state.estimate();
    cert.empirical_spectral = spectral_norm(diff);
    cert.empirical_frobenius = frobenius_norm(diff);
    return cert;
}

std::optional<DenseMatrix> lemma1_difference(const LtiSystem& truth,
                                             const InitialCondition& ic,
                                             const RegressionState& state) {
    if (!truth.symmetric() || !truth.spectral_profile()) {
        throw InvalidInputError("lemma1_difference: truth must be symmetric");
    }
    if (state.step() < 1) {
        throw InvalidInputError("lemma1_difference: requires k >= 1");
    }
    const SpectralProfile& profile = *truth.spectral_profile();
    const std::size_t n = profile.dimension();
    const std::size_t r = profile.rank;
    const std::size_t k = static_cast<std::size_t>(state.step());

    // w = Q Lambda^k nu over the nonzero eigenvalues.
    std::vector<double> weights(r);
    for (std::size_t j = 0; j < r; ++j) {
        weights[j] = ic.nu[j] * std::pow(profile.eigenvalues[j], static_cast<double>(k));
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t i = 0; i < n; ++i) w[i] += profile.q_full(i, j) * weights[j];
    }

    const DenseMatrix& u_prev = state.svd_previous().u;
    DenseMatrix s = DenseMatrix::identity(n);
    if (u_prev.cols() > 0) s -= kernels::multiply_a_bt(u_prev, u_prev);

    const std::vector<double> y = matvec(s, w);
    const double denom = dot(y, y);
    if (denom <= kDegeneracyTolerance * dot(w, w)) return std::nullopt;

    DenseMatrix inner = DenseMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) inner(i, j) -= y[i] * w[j] / denom;
    }
    return kernels::multiply(truth.a(), kernels::multiply(inner, s));
}

}  // namespace lsqcert
