#include "lsqcert/dense_matrix.hpp"

#include <cmath>
#include <string>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"

namespace lsqcert {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
        throw InvalidInputError("DenseMatrix: entries length does not equal rows*cols");
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw InvalidInputError("DenseMatrix: ragged initializer rows");
        }
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
    DenseMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

DenseMatrix DenseMatrix::column_vector(std::span<const double> values) {
    DenseMatrix m(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
    return m;
}

bool DenseMatrix::is_finite() const noexcept {
    for (double e : entries_) {
        if (!std::isfinite(e)) return false;
    }
    return true;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

std::vector<double> DenseMatrix::column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

std::vector<double> DenseMatrix::row(std::size_t i) const {
    return {entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
            entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> values) {
    if (values.size() != rows_) {
        throw InvalidInputError("set_column: length does not match row count");
    }
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

DenseMatrix DenseMatrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
        throw InvalidInputError("columns: range exceeds column count");
    }
    DenseMatrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
    }
    return out;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidInputError("matrix addition: shape mismatch");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidInputError("matrix subtraction: shape mismatch");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double scalar) {
    for (double& e : entries_) e *= scalar;
    return *this;
}

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs += rhs; }
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs -= rhs; }
DenseMatrix operator*(DenseMatrix m, double scalar) { return m *= scalar; }
DenseMatrix operator*(double scalar, DenseMatrix m) { return m *= scalar; }

DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    return kernels::multiply(lhs, rhs);
}

void require_finite(const DenseMatrix& m, const char* what) {
    if (!m.is_finite()) {
        throw InvalidInputError(std::string(what) + ": non-finite entries");
    }
}

void require_finite(std::span<const double> v, const char* what) {
    for (double e : v) {
        if (!std::isfinite(e)) {
            throw InvalidInputError(std::string(what) + ": non-finite entries");
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInputError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
    return kernels::multiply_vec(a, x);
}

}  // namespace lsqcert
