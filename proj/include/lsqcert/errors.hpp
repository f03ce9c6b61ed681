#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsqcert {

/// Caller-supplied data violates a precondition: wrong shape, non-finite
/// entries, zero initial state, duplicate Vandermonde nodes, and so on.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative factorization did not converge or produced an internally
/// inconsistent result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed external CSV; carries the 1-based row/column of the bad cell.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t row, std::size_t column)
        : std::runtime_error(message), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Filesystem failure while reading inputs or writing artifacts.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lsqcert
