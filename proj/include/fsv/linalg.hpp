#pragma once

// Dense row-major matrices sized for moment vectors (at most a few dozen
// rows/columns on the estimator path; residual matrices are T x p).

#include <cstddef>
#include <vector>

namespace fsv {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n);
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double trace(const Matrix& a);

// Lower Cholesky factor of a symmetric positive definite matrix; returns
// false without touching `l` further when a nonpositive pivot appears.
bool cholesky(const Matrix& a, Matrix& l);

// Solve A x = b with A SPD via Cholesky. Throws NumericError when not PD.
std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b);

// Inverse of an SPD matrix. Throws NumericError when not PD.
Matrix spd_inverse(const Matrix& a);

// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending order.
std::vector<double> sym_eigenvalues(Matrix a);

// x' A y for conformable vectors.
double quad_form(const std::vector<double>& x, const Matrix& a, const std::vector<double>& y);

}  // namespace fsv
