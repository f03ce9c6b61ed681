#pragma once

#include "lsqcert/dense_matrix.hpp"

namespace lsqcert {

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade core.
/// Square finite input only.
DenseMatrix matrix_exponential(const DenseMatrix& a);

}  // namespace lsqcert
