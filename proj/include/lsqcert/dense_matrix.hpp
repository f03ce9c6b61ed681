#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lsqcert {

/// Dense real matrix with row-major storage. The universal numeric carrier:
/// system matrices, snapshot blocks, SVD factors, projectors and error
/// operators are all DenseMatrix values. Entries are plain doubles; nothing
/// here admits NaN/Inf once an operation validates its inputs.
class DenseMatrix {
public:
    DenseMatrix() = default;

    /// rows x cols matrix of zeros.
    DenseMatrix(std::size_t rows, std::size_t cols);

    /// Adopts `entries` (row-major); length must equal rows*cols.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    /// Literal rows: DenseMatrix{{1, 2}, {3, 4}}. All rows must agree in width.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> values);
    static DenseMatrix column_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    double* data() noexcept { return entries_.data(); }
    const double* data() const noexcept { return entries_.data(); }
    const std::vector<double>& entries() const noexcept { return entries_; }

    bool is_finite() const noexcept;

    DenseMatrix transposed() const;

    std::vector<double> column(std::size_t j) const;
    std::vector<double> row(std::size_t i) const;
    void set_column(std::size_t j, std::span<const double> values);

    /// Columns [first, first+count) as a new matrix.
    DenseMatrix columns(std::size_t first, std::size_t count) const;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double scalar);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator*(DenseMatrix m, double scalar);
DenseMatrix operator*(double scalar, DenseMatrix m);

/// Matrix product via the kernel layer (see kernels.hpp).
DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs);

/// Throws InvalidInputError when any entry is NaN/Inf. `what` names the
/// operand in the message.
void require_finite(const DenseMatrix& m, const char* what);
void require_finite(std::span<const double> v, const char* what);

// ---------------------------------------------------------------------------
// Small vector helpers (state vectors are plain std::vector<double>)
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// y_i = A x (dispatches to the kernel layer).
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);

}  // namespace lsqcert
