#include "fsv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsv/errors.hpp"

namespace fsv {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    }
    return t;
}

double trace(const Matrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("trace: square matrix required");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) s += a(i, i);
    return s;
}

bool cholesky(const Matrix& a, Matrix& l) {
    if (a.rows != a.cols) throw std::invalid_argument("cholesky: square matrix required");
    const std::size_t n = a.rows;
    l = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) return false;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b) {
    if (b.size() != a.rows) throw std::invalid_argument("solve_spd: shape mismatch");
    Matrix l;
    if (!cholesky(a, l)) throw NumericError("solve_spd: matrix is not positive definite");
    const std::size_t n = a.rows;
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

Matrix spd_inverse(const Matrix& a) {
    const std::size_t n = a.rows;
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> col = solve_spd(a, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    // Symmetrize away the solve round-off.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    }
    return inv;
}

std::vector<double> sym_eigenvalues(Matrix a) {
    if (a.rows != a.cols) throw std::invalid_argument("sym_eigenvalues: square matrix required");
    const std::size_t n = a.rows;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        }
        if (off < 1e-30 * (1.0 + trace(a) * trace(a))) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = 0.5 * (a(q, q) - a(p, p)) / a(p, q);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double quad_form(const std::vector<double>& x, const Matrix& a, const std::vector<double>& y) {
    if (x.size() != a.rows || y.size() != a.cols) {
        throw std::invalid_argument("quad_form: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) row += a(i, j) * y[j];
        s += x[i] * row;
    }
    return s;
}

}  // namespace fsv
