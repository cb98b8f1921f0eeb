#pragma once

#include <string>
#include <vector>

#include "fsv/params.hpp"

namespace fsv {

// Which measurement-error variance is added to the lag-0 moment condition.
enum class CorrectionMode { None, CltRv, ExactRv, CltBv };

// Kebab-case names used in CLI flags and serialized fits.
const char* to_string(CorrectionMode mode);
CorrectionMode correction_from_string(const std::string& name);

// One trading day of n+1 equispaced log prices; n is implied by the length.
struct IntradayDay {
    std::vector<double> log_prices;

    int n() const { return static_cast<int>(log_prices.size()) - 1; }
};

// Sum of squared intraday log-price increments.
double realized_variance(const IntradayDay& day);

// (pi/2) * sum |d_i||d_{i-1}| over adjacent increments; robust to a single
// jump, consistent for integrated variance on jump-free days.
double bipower_variation(const IntradayDay& day);

// Realized variance restricted to increments below the jump threshold
// u_n = threshold_mult * sqrt(BV_day) * n^{-0.49}. The threshold scales like
// a per-increment standard deviation estimated from bipower variation.
double truncated_rv(const IntradayDay& day, double threshold_mult = 4.0);

// Variance of the daily measurement error RV - IV under the chosen proxy:
//   CltRv:   2 xi^2 e^{kappa(0)} / n
//   ExactRv: (4 xi^2 / n) int_0^1 (1-y) e^{kappa(y/n)} dy
//   CltBv:   (pi^2/4 + pi - 3) xi^2 e^{kappa(0)} / n
// CltBv / CltRv is the exact constant (pi^2/4 + pi - 3) / 2, and
// 0 < ExactRv <= CltRv holds for every parameter set (checked per call).
double error_variance_c(const FsvParams& params, int n, CorrectionMode mode);

}  // namespace fsv
