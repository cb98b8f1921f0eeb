#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fsv/kernel.hpp"
#include "fsv/measurement.hpp"

namespace fsv {

// Moment selection for GMM: which integrated-variance moments enter and how
// the lag-0 raw second moment is corrected for proxy measurement error.
struct MomentSpec {
    std::vector<int> lags{0, 1, 2, 3, 5, 20, 50};
    CorrectionMode correction = CorrectionMode::None;
    int n_intraday = 0;

    // Throws std::invalid_argument on violated invariants: lags strictly
    // increasing and nonnegative; a correction requires lag 0 and n_intraday.
    void validate() const;

    std::size_t dim() const { return lags.size() + 1; }
};

// Ordered as [E IV, E IV^2, E IV_t IV_{t+l}, ...]: the lag-0 raw second
// moment sits second and the remaining lags follow in MomentSpec order.
struct MomentVector {
    std::vector<double> values;
};

// E[IV_t] = xi for every kernel.
double mean_iv(const CovKernel& kernel, double xi);

// E[IV_t IV_{t+l}] = xi^2 int_0^1 (1-y) [e^{kappa(l+y)} + e^{kappa(|l-y|)}] dy.
double raw_second_moment_iv(const CovKernel& kernel, double xi, int ell);

// E[(IV_t - xi)(IV_{t+l} - xi)] = raw_second_moment_iv - xi^2.
double autocov_iv(const CovKernel& kernel, double xi, int ell);

// E[IV^3] = 6 xi^3 int_0^1 int_0^x (1-x) e^{kappa(x-y)+kappa(x)+kappa(y)} dy dx.
double third_moment_iv(const CovKernel& kernel, double xi);

// E[IV^4] = 24 xi^4 over the ordered simplex z < y < x with weight (1-x) and
// all six pairwise/level kappa terms in the exponent.
double fourth_moment_iv(const CovKernel& kernel, double xi);

// Large-lag asymptote of autocov_iv: xi^2 kappa(l) times the weight
// e^{-rho}(e^{rho}-1)^2 / rho^2 (1 when rho = 0). The Gamma-BSS branch
// returns the explicit product form in its documented shape.
double autocov_tail_approx(const CovKernel& kernel, double xi, int ell);

// Collapses int_{k-1}^{k} int_0^1 f(|s-t|) ds dt to the one-dimensional
// integral int_0^1 (1-y)(f(|k-1-y|) + f(k-1+y)) dy. Public as a test oracle.
double lemma_a1_reduce(const std::function<double(double)>& f, int k);

// Model-implied moment vector with the lag-0 entry corrected per spec.
MomentVector model_moment_vector(const CovKernel& kernel, double xi, const MomentSpec& spec);

}  // namespace fsv
