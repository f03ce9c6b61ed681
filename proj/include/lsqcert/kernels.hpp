#pragma once

#include <span>
#include <vector>

#include "lsqcert/dense_matrix.hpp"

namespace lsqcert::kernels {

/// Flop threshold below which the OpenMP kernels fall through to the serial
/// loops without touching the OpenMP runtime.
inline constexpr std::size_t kParallelGrain = std::size_t{1} << 18;

// OpenMP-parallel dense kernels. Each parallelizes over independent output
// rows only; the per-element accumulation order is shared with the serial
// reference kernels below, so the two variants agree bit-for-bit.

/// C = A * B
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);

/// C = A' * B
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);

/// C = A * B'
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);

/// y = A x
std::vector<double> multiply_vec(const DenseMatrix& a, std::span<const double> x);

/// In-place Givens update of columns p and q:
/// (m_p, m_q) <- (c*m_p - s*m_q, s*m_p + c*m_q)
void rotate_columns(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s);

/// Serial reference implementations, kept for tests and the kernel
/// benchmark. Results must equal the parallel kernels exactly.
namespace serial {

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> multiply_vec(const DenseMatrix& a, std::span<const double> x);
void rotate_columns(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s);

}  // namespace serial

}  // namespace lsqcert::kernels
