#pragma once

#include <cstddef>
#include <span>

namespace fsv {

// Inverse standard-normal CDF, accurate to ~1e-15 after one Halley refinement.
double normal_quantile(double p);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Upper-tail probability of a chi-square with dof degrees of freedom.
double chi2_sf(double x, int dof);

double mean(std::span<const double> x);

// Unbiased sample variance (divisor n-1).
double variance(std::span<const double> x);

// Sample autocovariance at the given lag, divisor n (matches the moment
// convention used by the estimator).
double autocovariance(std::span<const double> x, std::size_t lag);

}  // namespace fsv
