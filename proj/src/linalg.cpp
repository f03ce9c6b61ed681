#include "lsqcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"

namespace lsqcert {

namespace {

constexpr int kMaxJacobiSweeps = 60;
constexpr int kMaxEigenSweeps = 100;
constexpr double kJacobiOrthTol = 1e-14;

struct RawSvd {
    DenseMatrix w;                    // rotated copy of the input, columns = u_j * sigma_j
    DenseMatrix v;                    // accumulated right rotations
    std::vector<double> sigma;        // column norms, unsorted
};

// One-sided Jacobi on a matrix with rows >= cols. Rotates column pairs of W
// (and V) until all pairwise column inner products are negligible relative
// to the column norms.
RawSvd one_sided_jacobi(const DenseMatrix& input) {
    RawSvd out{input, DenseMatrix::identity(input.cols()), {}};
    DenseMatrix& w = out.w;
    const std::size_t n = w.cols();

    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        // Columns whose mass has collapsed to roundoff (squared norm below
        // 1e-30 of the largest) carry sigma ~ 0; pairs touching them can
        // never pass a relative orthogonality test and would cycle forever,
        // so they are left alone.
        double max_sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t i = 0; i < w.rows(); ++i) sq += w(i, j) * w(i, j);
            max_sq = std::max(max_sq, sq);
        }
        const double dead_sq = 1e-30 * max_sq;

        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < w.rows(); ++i) {
                    const double wp = w(i, p);
                    const double wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (gamma == 0.0 || alpha <= dead_sq || beta <= dead_sq) continue;
                if (std::abs(gamma) <= kJacobiOrthTol * std::sqrt(alpha * beta)) continue;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                kernels::rotate_columns(w, p, q, c, s);
                kernels::rotate_columns(out.v, p, q, c, s);
                rotated = true;
            }
        }
        if (!rotated) {
            out.sigma.resize(n);
            for (std::size_t j = 0; j < n; ++j) out.sigma[j] = norm2(w.column(j));
            return out;
        }
    }
    throw NumericalError("svd: Jacobi sweeps did not converge");
}

}  // namespace

DenseMatrix SvdFactors::reconstruct() const {
    DenseMatrix us = u;
    for (std::size_t j = 0; j < singular_values.size(); ++j) {
        for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= singular_values[j];
    }
    return kernels::multiply_a_bt(us, v);
}

SvdFactors svd(const DenseMatrix& m, double relative_tolerance) {
    require_finite(m, "svd");
    if (relative_tolerance < 0.0) {
        throw InvalidInputError("svd: negative rank tolerance");
    }

    // Jacobi wants tall input; factor the transpose and swap U/V otherwise.
    const bool transposed = m.rows() < m.cols();
    RawSvd raw = one_sided_jacobi(transposed ? m.transposed() : m);

    std::vector<std::size_t> order(raw.sigma.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return raw.sigma[a] > raw.sigma[b]; });

    const double sigma_max = order.empty() ? 0.0 : raw.sigma[order[0]];
    const double cut = relative_tolerance * sigma_max;

    std::size_t rank = 0;
    for (std::size_t j : order) {
        if (raw.sigma[j] > cut && raw.sigma[j] > 0.0) ++rank;
    }

    SvdFactors out;
    out.rank_tolerance = cut;
    out.numeric_rank = rank;
    out.singular_values.reserve(rank);

    const std::size_t m_rows = transposed ? m.cols() : m.rows();
    const std::size_t m_cols = transposed ? m.rows() : m.cols();
    DenseMatrix left(m_rows, rank);
    DenseMatrix right(m_cols, rank);
    for (std::size_t idx = 0; idx < rank; ++idx) {
        const std::size_t j = order[idx];
        const double sigma = raw.sigma[j];
        out.singular_values.push_back(sigma);
        for (std::size_t i = 0; i < m_rows; ++i) left(i, idx) = raw.w(i, j) / sigma;
        for (std::size_t i = 0; i < m_cols; ++i) right(i, idx) = raw.v(i, j);
    }

    // For a transposed factorization m' = L Sigma R', the roles flip:
    // m = R Sigma L', so U = R and V = L.
    out.u = transposed ? std::move(right) : std::move(left);
    out.v = transposed ? std::move(left) : std::move(right);
    return out;
}

DenseMatrix pseudo_inverse(const SvdFactors& factors) {
    // V * inv(Sigma) * U'; zero singular values were already truncated away
    // and stay untouched as zeros of the result.
    DenseMatrix vs = factors.v;
    for (std::size_t j = 0; j < factors.singular_values.size(); ++j) {
        const double inv = 1.0 / factors.singular_values[j];
        for (std::size_t i = 0; i < vs.rows(); ++i) vs(i, j) *= inv;
    }
    return kernels::multiply_a_bt(vs, factors.u);
}

DenseMatrix pseudo_inverse(const DenseMatrix& m, double relative_tolerance) {
    return pseudo_inverse(svd(m, relative_tolerance));
}

std::size_t numeric_rank(const DenseMatrix& m, double relative_tolerance) {
    return svd(m, relative_tolerance).numeric_rank;
}

double spectral_norm(const DenseMatrix& m) {
    require_finite(m, "spectral_norm");
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    RawSvd raw = one_sided_jacobi(m.rows() < m.cols() ? m.transposed() : m);
    double best = 0.0;
    for (double s : raw.sigma) best = std::max(best, s);
    return best;
}

double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double e : m.entries()) s += e * e;
    return std::sqrt(s);
}

EigenDecomposition symmetric_eigendecomposition(const DenseMatrix& m) {
    require_finite(m, "symmetric_eigendecomposition");
    if (m.rows() != m.cols()) {
        throw InvalidInputError("symmetric_eigendecomposition: matrix not square");
    }
    const std::size_t n = m.rows();
    const double scale = frobenius_norm(m);
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = m(i, j) - m(j, i);
            asym += d * d;
        }
    }
    if (std::sqrt(asym) > 1e-10 * std::max(scale, 1e-300)) {
        throw InvalidInputError("symmetric_eigendecomposition: matrix not symmetric");
    }

    // Work on the symmetrized copy; cyclic Jacobi rotations.
    DenseMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
    DenseMatrix q = DenseMatrix::identity(n);

    for (int sweep = 0; sweep < kMaxEigenSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * w(i, j) * w(i, j);
        }
        if (std::sqrt(off) <= 1e-14 * std::max(scale, 1e-300)) {
            EigenDecomposition out;
            out.eigenvalues.resize(n);
            for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = w(i, i);
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return out.eigenvalues[a] < out.eigenvalues[b];
            });
            std::vector<double> sorted(n);
            DenseMatrix qs(n, n);
            for (std::size_t idx = 0; idx < n; ++idx) {
                sorted[idx] = out.eigenvalues[order[idx]];
                for (std::size_t i = 0; i < n; ++i) qs(i, idx) = q(i, order[idx]);
            }
            out.eigenvalues = std::move(sorted);
            out.q = std::move(qs);
            return out;
        }

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t qq = p + 1; qq < n; ++qq) {
                const double wpq = w(p, qq);
                if (wpq == 0.0) continue;
                const double theta = (w(qq, qq) - w(p, p)) / (2.0 * wpq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Similarity update J' W J: rotate columns, then rows.
                kernels::serial::rotate_columns(w, p, qq, c, s);
                for (std::size_t j = 0; j < n; ++j) {
                    const double vp = w(p, j);
                    const double vq = w(qq, j);
                    w(p, j) = c * vp - s * vq;
                    w(qq, j) = s * vp + c * vq;
                }
                kernels::serial::rotate_columns(q, p, qq, c, s);
            }
        }
    }
    throw NumericalError("symmetric_eigendecomposition: Jacobi sweeps did not converge");
}

DenseMatrix orthonormal_complement(const DenseMatrix& u) {
    const std::size_t n = u.rows();
    const std::size_t r = u.cols();
    if (r > n) throw InvalidInputError("orthonormal_complement: more columns than rows");

    // Eigenvectors of the projector I - U U' with eigenvalue 1 span the
    // complement; the spectrum clusters at {0, 1} so 0.5 splits cleanly.
    DenseMatrix p = DenseMatrix::identity(n);
    if (r > 0) p -= kernels::multiply_a_bt(u, u);
    EigenDecomposition eig = symmetric_eigendecomposition(p);

    DenseMatrix out(n, n - r);
    std::size_t kept = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (eig.eigenvalues[j] > 0.5) {
            if (kept == n - r) {
                throw NumericalError("orthonormal_complement: inconsistent projector rank");
            }
            for (std::size_t i = 0; i < n; ++i) out(i, kept) = eig.q(i, j);
            ++kept;
        }
    }
    if (kept != n - r) {
        throw NumericalError("orthonormal_complement: inconsistent projector rank");
    }
    return out;
}

DenseMatrix solve_linear(const DenseMatrix& a, const DenseMatrix& b) {
    require_finite(a, "solve_linear");
    require_finite(b, "solve_linear");
    if (a.rows() != a.cols()) throw InvalidInputError("solve_linear: matrix not square");
    if (a.rows() != b.rows()) throw InvalidInputError("solve_linear: shape mismatch");

    const std::size_t n = a.rows();
    DenseMatrix lu = a;
    DenseMatrix x = b;

    double scale = 0.0;
    for (double e : a.entries()) scale = std::max(scale, std::abs(e));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(lu(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            if (std::abs(lu(i, col)) > best) {
                best = std::abs(lu(i, col));
                pivot = i;
            }
        }
        if (best <= 1e-14 * std::max(scale, 1e-300)) {
            throw NumericalError("solve_linear: numerically singular matrix");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(pivot, j));
            for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(col, j), x(pivot, j));
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = lu(i, col) / lu(col, col);
            lu(i, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < x.cols(); ++j) x(col, j) /= lu(col, col);
        for (std::size_t i = 0; i < col; ++i) {
            const double f = lu(i, col);
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(col, j);
        }
    }
    return x;
}

}  // namespace lsqcert
