#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lsqcert/dense_matrix.hpp"

namespace lsqcert {

/// splitmix64-based stream. The project's single randomness source, so a
/// recorded seed reproduces a run bit-identically regardless of the standard
/// library's distribution internals.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double next_uniform();

    /// Standard normal via the polar method (one spare cached).
    double next_gaussian();

    std::vector<double> gaussian_vector(std::size_t n);
    DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols);

private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

/// Random orthogonal matrix: QR of a seeded Gaussian matrix, Q factor only
/// (modified Gram-Schmidt with a re-orthogonalization pass).
DenseMatrix random_orthogonal(std::size_t n, SeededRng& rng);

}  // namespace lsqcert
