#include "lsqcert/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"

namespace lsqcert {

std::optional<SquaredErrorBound> thm2_bound(const SpectralProfile& profile,
                                            const InitialCondition& ic, std::size_t k) {
    const std::size_t n = profile.dimension();
    if (!profile.all_simple() || k >= n || profile.rank == 0) return std::nullopt;

    const double revealed = static_cast<double>(
        std::min(k, ic.nnz_nu + std::min<std::size_t>(ic.nnz_mu, 1)));
    const double free_dim = static_cast<double>(n) - revealed;

    SquaredErrorBound bound;
    const double lambda_1 = std::abs(profile.eigenvalues[0]);
    const double lambda_n = std::abs(profile.eigenvalues[profile.rank - 1]);
    bound.value = free_dim * lambda_1 * lambda_1 - lambda_n * lambda_n;

    const auto [lo, hi] =
        std::minmax_element(profile.eigenvalues.begin(), profile.eigenvalues.end());
    bound.signed_reading = free_dim * (*hi) * (*hi) - (*lo) * (*lo);
    return bound;
}

std::size_t predicted_rank(const SpectralProfile& profile, std::size_t k) {
    return std::min(k + 1, profile.distinct_count());
}

std::optional<ErrorFloor> thm4_error(const SpectralProfile& profile) {
    if (profile.all_simple()) return std::nullopt;
    ErrorFloor floor;
    double frob_sq = 0.0;
    for (std::size_t c = 0; c < profile.distinct_count(); ++c) {
        const std::size_t m = profile.multiplicities[c];
        if (m <= 1) continue;
        const double value = profile.distinct_values[c];
        floor.spectral = std::max(floor.spectral, std::abs(value));
        frob_sq += static_cast<double>(m - 1) * value * value;
    }
    floor.frobenius = std::sqrt(frob_sq);
    return floor;
}

MultiplicityPartition multiplicity_partition(const SpectralProfile& profile,
                                             const SvdFactors& svd_xk) {
    const std::size_t n = profile.dimension();
    const std::size_t s = profile.distinct_count();
    if (svd_xk.numeric_rank != s) {
        throw InvalidInputError(
            "multiplicity_partition: rank(X_k) != s (data not yet saturated)");
    }
    if (svd_xk.u.rows() != n) {
        throw InvalidInputError("multiplicity_partition: dimension mismatch");
    }

    MultiplicityPartition part;
    part.u2 = orthonormal_complement(svd_xk.u);
    part.lambda1 = profile.distinct_values;
    part.q1 = DenseMatrix(n, s);

    for (std::size_t c = 0; c < s; ++c) {
        const std::size_t m = profile.multiplicities[c];
        const DenseMatrix eigvecs = profile.eigenspace(c);

        if (m == 1) {
            part.q1.set_column(c, eigvecs.column(0));
            continue;
        }

        // Coordinates of U2 inside this eigenspace; its column space is the
        // (m-1)-dimensional part of the complement living here.
        const DenseMatrix coords = kernels::multiply_at_b(eigvecs, part.u2);
        const SvdFactors coord_svd = svd(coords);
        if (coord_svd.numeric_rank != m - 1) {
            throw NumericalError(
                "multiplicity_partition: eigenspace does not split as m-1 "
                "complement directions");
        }

        EigenspaceBlock block;
        block.value = profile.distinct_values[c];
        block.multiplicity = m;
        block.eigvecs = eigvecs;
        block.null_basis = kernels::multiply(eigvecs, coord_svd.u);
        block.coupling = kernels::multiply_at_b(block.null_basis, eigvecs);
        part.blocks.push_back(std::move(block));

        // Representative: the one eigenspace direction the data does see,
        // i.e. the orthogonal complement of the null basis inside the block.
        const DenseMatrix rep_coords = orthonormal_complement(coord_svd.u);
        part.q1.set_column(c, kernels::multiply(eigvecs, rep_coords).column(0));
    }
    part.ell = part.blocks.size();
    return part;
}

double lemma3_residual(const DenseMatrix& u2, const DenseMatrix& q1) {
    if (u2.cols() == 0 || q1.cols() == 0) return 0.0;
    return frobenius_norm(kernels::multiply_at_b(u2, q1));
}

DenseMatrix distinct_representatives(const SpectralProfile& profile,
                                     const InitialCondition& ic) {
    const std::size_t n = profile.dimension();
    const double x0_norm = norm2(ic.x0);
    DenseMatrix reps(n, profile.distinct_count());

    std::size_t first = 0;
    for (std::size_t c = 0; c < profile.distinct_count(); ++c) {
        const std::size_t m = profile.multiplicities[c];
        std::vector<double> direction(n, 0.0);
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t col = first + b;
            const double alpha =
                col < profile.rank ? ic.nu[col] : ic.mu[col - profile.rank];
            for (std::size_t i = 0; i < n; ++i) {
                direction[i] += alpha * profile.q_full(i, col);
            }
        }
        const double nrm = norm2(direction);
        if (nrm <= 1e-12 * x0_norm) {
            throw InvalidInputError(
                "distinct_representatives: x0 orthogonal to an eigenspace");
        }
        for (double& e : direction) e /= nrm;
        reps.set_column(c, direction);
        first += m;
    }
    return reps;
}

BoundReport bound_report(const LtiSystem& truth,
                         const std::optional<InitialCondition>& ic,
                         const RegressionState& state, const ErrorCertificate& cert) {
    if (state.step() < 1) {
        throw InvalidInputError("bound_report: requires k >= 1");
    }
    BoundReport rep;
    rep.k = cert.k;
    rep.observed_rank = state.svd_current().numeric_rank;

    if (!truth.symmetric() || !truth.spectral_profile()) {
        const std::string why = "system not symmetric";
        rep.predicted_rank_na = why;
        rep.thm2.na_reason = why;
        rep.thm2_signed.na_reason = why;
        rep.thm4_spectral.na_reason = why;
        rep.thm4_frobenius.na_reason = why;
        rep.lemma3.na_reason = why;
        return rep;
    }

    const SpectralProfile& profile = *truth.spectral_profile();
    const std::size_t s = profile.distinct_count();
    rep.predicted_rank = predicted_rank(profile, rep.k);
    rep.lambda_star = profile.lambda_star;

    if (!profile.all_simple()) {
        rep.thm2.na_reason = "repeated eigenvalues present";
        rep.thm2_signed.na_reason = rep.thm2.na_reason;
    } else if (rep.k >= profile.dimension()) {
        rep.thm2.na_reason = "k >= n";
        rep.thm2_signed.na_reason = rep.thm2.na_reason;
    } else if (!ic) {
        rep.thm2.na_reason = "nu = 0 (x0 orthogonal to range(A))";
        rep.thm2_signed.na_reason = rep.thm2.na_reason;
    } else if (auto bound = thm2_bound(profile, *ic, rep.k)) {
        rep.thm2.value = bound->value;
        rep.thm2_signed.value = bound->signed_reading;
    }

    if (profile.all_simple()) {
        rep.thm4_spectral.na_reason = "all eigenvalues simple";
        rep.thm4_frobenius.na_reason = rep.thm4_spectral.na_reason;
    } else if (rep.k < s) {
        rep.thm4_spectral.na_reason = "k < s";
        rep.thm4_frobenius.na_reason = rep.thm4_spectral.na_reason;
    } else if (auto floor = thm4_error(profile)) {
        rep.thm4_spectral.value = floor->spectral;
        rep.thm4_frobenius.value = floor->frobenius;
    }

    if (rep.k < s) {
        rep.lemma3.na_reason = "k < s";
    } else if (rep.observed_rank != s) {
        rep.lemma3.na_reason = "rank(X_k) != s";
    } else if (!ic) {
        rep.lemma3.na_reason = "nu = 0 (x0 orthogonal to range(A))";
    } else {
        const DenseMatrix u2 = orthonormal_complement(state.svd_current().u);
        rep.lemma3.value = lemma3_residual(u2, distinct_representatives(profile, *ic));
    }
    return rep;
}

}  // namespace lsqcert
