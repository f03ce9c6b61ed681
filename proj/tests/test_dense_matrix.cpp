#include <doctest.h>

#include <limits>

#include "lsqcert/dense_matrix.hpp"
#include "lsqcert/errors.hpp"

using namespace lsqcert;

TEST_CASE("row-major storage and element access") {
    DenseMatrix m{{1, 2, 3}, {4, 5, 6}};
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(0, 2) == 3);
    CHECK(m(1, 0) == 4);
    CHECK(m.entries()[1 * 3 + 2] == 6);
}

TEST_CASE("entries length must match rows * cols") {
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), InvalidInputError);
    CHECK_THROWS_AS((DenseMatrix{{1, 2}, {3}}), InvalidInputError);
}

TEST_CASE("identity, diagonal and column factories") {
    CHECK(DenseMatrix::identity(3)(1, 1) == 1.0);
    CHECK(DenseMatrix::identity(3)(0, 1) == 0.0);

    const std::vector<double> d = {3, -4};
    DenseMatrix diag = DenseMatrix::diagonal(d);
    CHECK(diag(1, 1) == -4);
    CHECK(diag(0, 1) == 0);

    DenseMatrix col = DenseMatrix::column_vector(d);
    CHECK(col.rows() == 2);
    CHECK(col.cols() == 1);
}

TEST_CASE("transpose and column slicing") {
    DenseMatrix m{{1, 2}, {3, 4}, {5, 6}};
    DenseMatrix t = m.transposed();
    CHECK(t.rows() == 2);
    CHECK(t(0, 2) == 5);
    CHECK(t(1, 1) == 4);

    CHECK(m.column(1) == std::vector<double>{2, 4, 6});
    CHECK(m.row(2) == std::vector<double>{5, 6});

    DenseMatrix tail = m.columns(1, 1);
    CHECK(tail.cols() == 1);
    CHECK(tail(0, 0) == 2);
    CHECK_THROWS_AS(m.columns(1, 2), InvalidInputError);
}

TEST_CASE("arithmetic operators") {
    DenseMatrix a{{1, 2}, {3, 4}};
    DenseMatrix b{{1, 0}, {0, 1}};
    CHECK((a + b)(0, 0) == 2);
    CHECK((a - b)(1, 1) == 3);
    CHECK((a * 2.0)(1, 0) == 6);
    CHECK_THROWS_AS(a + DenseMatrix(3, 2), InvalidInputError);
}

TEST_CASE("finite checks") {
    DenseMatrix m{{1, 2}, {3, 4}};
    CHECK(m.is_finite());
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(m.is_finite());
    CHECK_THROWS_AS(require_finite(m, "operand"), InvalidInputError);
}

TEST_CASE("vector helpers") {
    const std::vector<double> a = {3, 4};
    const std::vector<double> b = {1, 2};
    CHECK(dot(a, b) == 11);
    CHECK(norm2(a) == 5);
    CHECK_THROWS_AS(dot(a, std::vector<double>{1.0}), InvalidInputError);
}
