#include "lsqcert/random.hpp"

#include <cmath>

#include "lsqcert/errors.hpp"

namespace lsqcert {

std::uint64_t SeededRng::next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SeededRng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_gaussian() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * next_uniform() - 1.0;
        v = 2.0 * next_uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
}

std::vector<double> SeededRng::gaussian_vector(std::size_t n) {
    std::vector<double> v(n);
    for (double& e : v) e = next_gaussian();
    return v;
}

DenseMatrix SeededRng::gaussian_matrix(std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = next_gaussian();
    }
    return m;
}

DenseMatrix random_orthogonal(std::size_t n, SeededRng& rng) {
    DenseMatrix g = rng.gaussian_matrix(n, n);
    DenseMatrix q(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v = g.column(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const std::vector<double> qi = q.column(i);
                const double proj = dot(qi, v);
                for (std::size_t r = 0; r < n; ++r) v[r] -= proj * qi[r];
            }
        }
        const double nrm = norm2(v);
        if (nrm < 1e-12) {
            throw NumericalError("random_orthogonal: degenerate Gaussian draw");
        }
        for (double& e : v) e /= nrm;
        q.set_column(j, v);
    }
    return q;
}

}  // namespace lsqcert
