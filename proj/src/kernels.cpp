#include "lsqcert/kernels.hpp"

#include <cstdint>

#include "lsqcert/errors.hpp"

namespace lsqcert::kernels {

namespace {

// Per-row cores shared by the OpenMP and serial variants. Keeping the
// element-level loop order in one place is what makes the two variants
// bit-identical.

inline void multiply_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c,
                         std::size_t i) {
    const std::size_t inner = a.cols();
    const std::size_t n = b.cols();
    double* ci = c.data() + i * n;
    for (std::size_t k = 0; k < inner; ++k) {
        const double aik = a(i, k);
        const double* bk = b.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
}

inline void multiply_at_b_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c,
                              std::size_t i) {
    const std::size_t inner = a.rows();
    const std::size_t n = b.cols();
    double* ci = c.data() + i * n;
    for (std::size_t k = 0; k < inner; ++k) {
        const double aki = a(k, i);
        const double* bk = b.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
}

inline void multiply_a_bt_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c,
                              std::size_t i) {
    const std::size_t inner = a.cols();
    const std::size_t n = b.rows();
    const double* ai = a.data() + i * inner;
    double* ci = c.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
        const double* bj = b.data() + j * inner;
        double s = 0.0;
        for (std::size_t k = 0; k < inner; ++k) s += ai[k] * bj[k];
        ci[j] = s;
    }
}

inline void multiply_vec_row(const DenseMatrix& a, std::span<const double> x,
                             std::vector<double>& y, std::size_t i) {
    const std::size_t n = a.cols();
    const double* ai = a.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ai[j] * x[j];
    y[i] = s;
}

inline void rotate_row(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s,
                       std::size_t i) {
    double* row = m.data() + i * m.cols();
    const double vp = row[p];
    const double vq = row[q];
    row[p] = c * vp - s * vq;
    row[q] = s * vp + c * vq;
}

void check_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw InvalidInputError("multiply: inner dimensions differ");
}

void check_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw InvalidInputError("multiply_at_b: row counts differ");
}

void check_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw InvalidInputError("multiply_a_bt: column counts differ");
}

void check_vec(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw InvalidInputError("multiply_vec: length mismatch");
}

void check_rotate(const DenseMatrix& m, std::size_t p, std::size_t q) {
    if (p >= m.cols() || q >= m.cols() || p == q) {
        throw InvalidInputError("rotate_columns: bad column indices");
    }
}

}  // namespace

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() * a.cols() * b.cols() <= kParallelGrain) return serial::multiply(a, b);
    check_multiply(a, b);
    DenseMatrix c(a.rows(), b.cols());
#pragma omp parallel for
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_row(a, b, c, i);
    return c;
}

DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() * a.cols() * b.cols() <= kParallelGrain) {
        return serial::multiply_at_b(a, b);
    }
    check_at_b(a, b);
    DenseMatrix c(a.cols(), b.cols());
#pragma omp parallel for
    for (std::size_t i = 0; i < a.cols(); ++i) multiply_at_b_row(a, b, c, i);
    return c;
}

DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() * a.cols() * b.rows() <= kParallelGrain) {
        return serial::multiply_a_bt(a, b);
    }
    check_a_bt(a, b);
    DenseMatrix c(a.rows(), b.rows());
#pragma omp parallel for
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_a_bt_row(a, b, c, i);
    return c;
}

std::vector<double> multiply_vec(const DenseMatrix& a, std::span<const double> x) {
    if (a.rows() * a.cols() <= kParallelGrain) return serial::multiply_vec(a, x);
    check_vec(a, x);
    std::vector<double> y(a.rows(), 0.0);
#pragma omp parallel for
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_vec_row(a, x, y, i);
    return y;
}

void rotate_columns(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s) {
    if (4 * m.rows() <= kParallelGrain) return serial::rotate_columns(m, p, q, c, s);
    check_rotate(m, p, q);
#pragma omp parallel for
    for (std::size_t i = 0; i < m.rows(); ++i) rotate_row(m, p, q, c, s, i);
}

namespace serial {

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    check_multiply(a, b);
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_row(a, b, c, i);
    return c;
}

DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    check_at_b(a, b);
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) multiply_at_b_row(a, b, c, i);
    return c;
}

DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    check_a_bt(a, b);
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_a_bt_row(a, b, c, i);
    return c;
}

std::vector<double> multiply_vec(const DenseMatrix& a, std::span<const double> x) {
    check_vec(a, x);
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) multiply_vec_row(a, x, y, i);
    return y;
}

void rotate_columns(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s) {
    check_rotate(m, p, q);
    for (std::size_t i = 0; i < m.rows(); ++i) rotate_row(m, p, q, c, s, i);
}

}  // namespace serial

}  // namespace lsqcert::kernels
