#include "lsqcert/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lsqcert/errors.hpp"
#include "lsqcert/expm.hpp"
#include "lsqcert/kernels.hpp"
#include "lsqcert/random.hpp"

namespace lsqcert {

namespace {

bool is_symmetric(const DenseMatrix& a) {
    double asym = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double d = a(i, j) - a(j, i);
            asym += d * d;
            scale += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(asym) <= 1e-10 * std::max(std::sqrt(scale), 1e-300);
}

DenseMatrix symmetrize(const DenseMatrix& a) {
    DenseMatrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
    return s;
}

}  // namespace

DenseMatrix SpectralProfile::eigenspace(std::size_t distinct_index) const {
    std::size_t first = 0;
    for (std::size_t c = 0; c < distinct_index; ++c) first += multiplicities[c];
    return q_full.columns(first, multiplicities[distinct_index]);
}

SpectralProfile make_spectral_profile(std::vector<double> eigenvalues, DenseMatrix q,
                                      double rank_tolerance, double cluster_tolerance) {
    const std::size_t n = eigenvalues.size();
    if (q.rows() != n || q.cols() != n) {
        throw InvalidInputError("make_spectral_profile: eigenvector shape mismatch");
    }

    // Cluster on the value-sorted list, where a repeated eigenvalue is a
    // contiguous interval even when an opposite-sign eigenvalue shares its
    // magnitude to within roundoff.
    std::vector<std::size_t> by_value(n);
    std::iota(by_value.begin(), by_value.end(), std::size_t{0});
    std::sort(by_value.begin(), by_value.end(),
              [&](std::size_t a, std::size_t b) { return eigenvalues[a] < eigenvalues[b]; });

    struct Cluster {
        double representative = 0.0;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n;) {
        const double anchor = eigenvalues[by_value[i]];
        std::size_t j = i + 1;
        while (j < n && std::abs(eigenvalues[by_value[j]] - anchor) <=
                            cluster_tolerance * std::max(1.0, std::abs(anchor))) {
            ++j;
        }
        Cluster c;
        double sum = 0.0;
        for (std::size_t t = i; t < j; ++t) {
            c.members.push_back(by_value[t]);
            sum += eigenvalues[by_value[t]];
        }
        c.representative = sum / static_cast<double>(j - i);
        clusters.push_back(std::move(c));
        i = j;
    }

    // Clusters in descending-magnitude order (nullspace last), members
    // grouped contiguously so the eigenspace blocks are column ranges.
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        const double ma = std::abs(a.representative);
        const double mb = std::abs(b.representative);
        if (ma != mb) return ma > mb;
        return a.representative > b.representative;
    });

    SpectralProfile p;
    p.eigenvalues.reserve(n);
    p.q_full = DenseMatrix(n, n);
    std::size_t col = 0;
    for (const Cluster& c : clusters) {
        p.distinct_values.push_back(c.representative);
        p.multiplicities.push_back(c.members.size());
        if (c.members.size() > 1) {
            const double mag = std::abs(c.representative);
            if (!p.lambda_star || mag > *p.lambda_star) p.lambda_star = mag;
        }
        for (std::size_t member : c.members) {
            p.eigenvalues.push_back(eigenvalues[member]);
            for (std::size_t i = 0; i < n; ++i) p.q_full(i, col) = q(i, member);
            ++col;
        }
    }

    const double lambda_max = n == 0 ? 0.0 : std::abs(p.eigenvalues[0]);
    p.rank = 0;
    for (double v : p.eigenvalues) {
        if (std::abs(v) > rank_tolerance * lambda_max) ++p.rank;
    }
    return p;
}

LtiSystem LtiSystem::from_matrix(DenseMatrix a, double rank_tolerance) {
    require_finite(a, "LtiSystem");
    if (a.rows() != a.cols()) throw InvalidInputError("LtiSystem: matrix not square");
    if (!is_symmetric(a)) return LtiSystem(std::move(a), false, std::nullopt);

    DenseMatrix sym = symmetrize(a);
    EigenDecomposition eig = symmetric_eigendecomposition(sym);
    SpectralProfile profile = make_spectral_profile(
        std::move(eig.eigenvalues), std::move(eig.q), rank_tolerance,
        kEigenvalueClusterTolerance);
    return LtiSystem(std::move(sym), true, std::move(profile));
}

LtiSystem LtiSystem::symmetric_with_profile(DenseMatrix a, SpectralProfile profile) {
    return LtiSystem(std::move(a), true, std::move(profile));
}

SnapshotLog::SnapshotLog(std::vector<double> x0) : dim_(x0.size()) {
    require_finite(x0, "SnapshotLog");
    if (dim_ == 0 || norm2(x0) == 0.0) {
        throw InvalidInputError("SnapshotLog: zero initial state");
    }
    snapshots_.push_back(std::move(x0));
}

void SnapshotLog::append(std::vector<double> x_next) {
    if (x_next.size() != dim_) {
        throw InvalidInputError("SnapshotLog: snapshot dimension mismatch");
    }
    require_finite(x_next, "SnapshotLog");
    snapshots_.push_back(std::move(x_next));
}

std::size_t SnapshotLog::k() const {
    if (!has_pairs()) throw InvalidInputError("SnapshotLog: fewer than two snapshots");
    return snapshots_.size() - 2;
}

std::span<const double> SnapshotLog::snapshot(std::size_t t) const {
    return snapshots_.at(t);
}

DenseMatrix SnapshotLog::x() const { return x_prefix(k()); }

DenseMatrix SnapshotLog::y() const {
    const std::size_t kk = k();
    DenseMatrix m(dim_, kk + 1);
    for (std::size_t j = 0; j <= kk; ++j) m.set_column(j, snapshots_[j + 1]);
    return m;
}

DenseMatrix SnapshotLog::x_prefix(std::size_t j) const {
    if (j > k()) throw InvalidInputError("SnapshotLog: prefix beyond latest step");
    DenseMatrix m(dim_, j + 1);
    for (std::size_t c = 0; c <= j; ++c) m.set_column(c, snapshots_[c]);
    return m;
}

SnapshotLog simulate(const LtiSystem& system, std::span<const double> x0,
                     std::size_t steps) {
    if (x0.size() != system.dimension()) {
        throw InvalidInputError("simulate: x0 dimension mismatch");
    }
    require_finite(x0, "simulate");
    if (norm2(x0) == 0.0) throw InvalidInputError("simulate: zero initial state");
    if (steps < 1) throw InvalidInputError("simulate: steps must be >= 1");

    SnapshotLog log(std::vector<double>(x0.begin(), x0.end()));
    std::vector<double> state(x0.begin(), x0.end());
    for (std::size_t t = 0; t <= steps; ++t) {
        state = matvec(system.a(), state);
        log.append(state);
    }
    return log;
}

LtiSystem synthesize_symmetric(std::span<const double> spectrum, std::uint64_t seed) {
    if (spectrum.empty()) throw InvalidInputError("synthesize_symmetric: empty spectrum");
    require_finite(spectrum, "synthesize_symmetric");

    const std::size_t n = spectrum.size();
    SeededRng rng(seed);
    DenseMatrix q = random_orthogonal(n, rng);

    // Requested spectrum is exact; clustering uses equality only.
    SpectralProfile profile = make_spectral_profile(
        std::vector<double>(spectrum.begin(), spectrum.end()), q, kDefaultRankTolerance,
        0.0);

    DenseMatrix ql = profile.q_full;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) ql(i, j) *= profile.eigenvalues[j];
    }
    DenseMatrix a = symmetrize(kernels::multiply_a_bt(ql, profile.q_full));
    return LtiSystem::symmetric_with_profile(std::move(a), std::move(profile));
}

InitialCondition decompose_initial_condition(const SpectralProfile& profile,
                                             std::span<const double> x0) {
    const std::size_t n = profile.dimension();
    if (x0.size() != n) {
        throw InvalidInputError("decompose_initial_condition: x0 dimension mismatch");
    }
    require_finite(x0, "decompose_initial_condition");
    const double x0_norm = norm2(x0);
    if (x0_norm == 0.0) {
        throw InvalidInputError("decompose_initial_condition: zero initial state");
    }

    InitialCondition ic;
    ic.x0.assign(x0.begin(), x0.end());
    const std::size_t r = profile.rank;
    ic.nu.resize(r);
    ic.mu.resize(n - r);
    const double threshold = 1e-9 * x0_norm;
    for (std::size_t j = 0; j < n; ++j) {
        double coef = 0.0;
        for (std::size_t i = 0; i < n; ++i) coef += profile.q_full(i, j) * x0[i];
        if (j < r) {
            ic.nu[j] = coef;
            if (std::abs(coef) > threshold) ++ic.nnz_nu;
        } else {
            ic.mu[j - r] = coef;
            if (std::abs(coef) > threshold) ++ic.nnz_mu;
        }
    }
    if (ic.nnz_nu == 0) {
        throw InvalidInputError(
            "decompose_initial_condition: nu = 0 (x0 orthogonal to range(A))");
    }
    return ic;
}

DenseMatrix weighted_petersen_laplacian() {
    // Nodes 0..4: outer cycle; 5..9: inner pentagram (i <-> i+2 mod 5).
    DenseMatrix w(10, 10);
    auto add_edge = [&](std::size_t i, std::size_t j, double weight) {
        w(i, j) = weight;
        w(j, i) = weight;
    };
    for (std::size_t i = 0; i < 5; ++i) {
        add_edge(i, (i + 1) % 5, 1.0);                  // outer cycle
        add_edge(5 + i, 5 + (i + 2) % 5, 1.0);          // pentagram
        add_edge(i, 5 + i, static_cast<double>(i + 1)); // spoke weights 1..5
    }
    DenseMatrix l(10, 10);
    for (std::size_t i = 0; i < 10; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < 10; ++j) degree += std::abs(w(i, j));
        l(i, i) = degree;
        for (std::size_t j = 0; j < 10; ++j) {
            if (i != j) l(i, j) = -w(i, j);
        }
    }
    return l;
}

LtiSystem discretize(const DenseMatrix& continuous_generator, double dt,
                     double rank_tolerance) {
    require_finite(continuous_generator, "discretize");
    if (continuous_generator.rows() != continuous_generator.cols()) {
        throw InvalidInputError("discretize: generator not square");
    }
    if (!(dt > 0.0)) throw InvalidInputError("discretize: dt must be > 0");

    DenseMatrix a = matrix_exponential(continuous_generator * (-dt));
    if (is_symmetric(continuous_generator)) a = symmetrize(a);
    return LtiSystem::from_matrix(std::move(a), rank_tolerance);
}

DenseMatrix vandermonde(std::span<const double> distinct_eigenvalues,
                        std::size_t columns) {
    require_finite(distinct_eigenvalues, "vandermonde");
    const std::size_t s = distinct_eigenvalues.size();
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double gap = std::abs(distinct_eigenvalues[i] - distinct_eigenvalues[j]);
            if (gap <= kEigenvalueClusterTolerance *
                           std::max(1.0, std::abs(distinct_eigenvalues[i]))) {
                throw InvalidInputError("vandermonde: duplicate eigenvalues at rows " +
                                        std::to_string(i) + " and " + std::to_string(j));
            }
        }
    }
    DenseMatrix v(s, columns);
    for (std::size_t i = 0; i < s; ++i) {
        double power = 1.0;
        for (std::size_t j = 0; j < columns; ++j) {
            v(i, j) = power;
            power *= distinct_eigenvalues[i];
        }
    }
    return v;
}

StructuralFactors structural_factorization(const SpectralProfile& profile,
                                           const InitialCondition& ic, std::size_t k) {
    const std::size_t n = profile.dimension();
    if (ic.nu.size() != profile.rank || ic.mu.size() != n - profile.rank) {
        throw InvalidInputError("structural_factorization: ic does not match profile");
    }

    StructuralFactors out;
    out.gamma = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.gamma(i, i) = i < profile.rank ? ic.nu[i] : ic.mu[i - profile.rank];
    }

    // Vandermonde over the full spectrum (repeats included), row order
    // matching q_full.
    out.vandermonde = DenseMatrix(n, k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double power = 1.0;
        for (std::size_t j = 0; j <= k; ++j) {
            out.vandermonde(i, j) = power;
            power *= profile.eigenvalues[i];
        }
    }
    return out;
}

}  // namespace lsqcert
