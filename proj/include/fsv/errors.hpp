#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsv {

// Adaptive quadrature gave up before reaching the requested tolerance.
struct QuadratureError : std::runtime_error {
    double requested;
    double achieved;
    QuadratureError(const std::string& what, double requested_, double achieved_)
        : std::runtime_error(what), requested(requested_), achieved(achieved_) {}
};

// Input data rejected: parse failure, non-finite values, series too short, ...
// `row` is the 1-based file row when the error is tied to one, 0 otherwise.
struct DataError : std::runtime_error {
    std::size_t row;
    explicit DataError(const std::string& what, std::size_t row_ = 0)
        : std::runtime_error(what), row(row_) {}
};

// Numerical breakdown outside quadrature: singular matrix, special-function
// overflow, non-PSD embedding, and similar.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fsv
