#pragma once

// Bound-constrained nonlinear least squares: Levenberg-Marquardt with
// Marquardt diagonal scaling and projection of trial steps onto the box.

#include <functional>
#include <vector>

namespace fsv {

struct NlsOptions {
    double tol = 1e-6;         // relative step size termination
    int max_iterations = 300;
    double fd_rel_step = 1e-6;  // forward-difference Jacobian step
    double fd_abs_floor = 1e-8;
};

struct NlsResult {
    std::vector<double> x;
    double objective = 0.0;  // sum of squared residuals at x
    int iterations = 0;
    int residual_evals = 0;
    bool converged = false;
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Minimizes |r(x)|^2 over the box lo <= x <= hi. x0 is clamped to the box
// before the first evaluation. Residual size must not change between calls.
NlsResult nls_minimize(const ResidualFn& residual, std::vector<double> x0,
                       const std::vector<double>& lo, const std::vector<double>& hi,
                       const NlsOptions& options = {});

}  // namespace fsv
