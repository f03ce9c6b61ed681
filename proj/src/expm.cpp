#include "lsqcert/expm.hpp"

#include <array>
#include <cmath>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"
#include "lsqcert/linalg.hpp"

namespace lsqcert {

namespace {

double one_norm(const DenseMatrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

// Degree-13 Pade coefficients and its scaling threshold.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

DenseMatrix matrix_exponential(const DenseMatrix& a) {
    require_finite(a, "matrix_exponential");
    if (a.rows() != a.cols()) {
        throw InvalidInputError("matrix_exponential: matrix not square");
    }
    const std::size_t n = a.rows();
    if (n == 0) return DenseMatrix();

    const double norm = one_norm(a);
    int squarings = 0;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    }
    DenseMatrix scaled = a * std::ldexp(1.0, -squarings);

    const DenseMatrix ident = DenseMatrix::identity(n);
    const DenseMatrix a2 = kernels::multiply(scaled, scaled);
    const DenseMatrix a4 = kernels::multiply(a2, a2);
    const DenseMatrix a6 = kernels::multiply(a2, a4);

    DenseMatrix w1 = a6 * kPade13[13] + a4 * kPade13[11] + a2 * kPade13[9];
    DenseMatrix w2 = a6 * kPade13[7] + a4 * kPade13[5] + a2 * kPade13[3] + ident * kPade13[1];
    DenseMatrix u = kernels::multiply(scaled, kernels::multiply(a6, w1) + w2);

    DenseMatrix z1 = a6 * kPade13[12] + a4 * kPade13[10] + a2 * kPade13[8];
    DenseMatrix v = kernels::multiply(a6, z1) + a6 * kPade13[6] + a4 * kPade13[4] +
                    a2 * kPade13[2] + ident * kPade13[0];

    DenseMatrix r = solve_linear(v - u, v + u);
    for (int i = 0; i < squarings; ++i) r = kernels::multiply(r, r);
    return r;
}

}  // namespace lsqcert
