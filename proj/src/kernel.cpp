#include "fsv/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "fsv/errors.hpp"
#include "fsv/quadrature.hpp"
#include "fsv/stats.hpp"

namespace fsv {

namespace {

// int_0^c e^s s^q ds by ascending series; all terms are positive, so there is
// no cancellation, and the tail decays like a Poisson(c) tail past n = c.
double exp_power_lower_integral(double c, double q) {
    double term = std::pow(c, q + 1.0) / (q + 1.0);
    double sum = term;
    for (int n = 1; n < 4000; ++n) {
        term *= c * (q + n) / (n * (q + n + 1.0));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// 1/2 * I(c) - c^q for I(c) = int_R e^{-|y|} |c+y|^q dy, through incomplete
// gamma functions instead of panel quadrature:
//   y < -c:      e^{-c} Gamma(q+1)
//   -c < y < 0:  e^{-c} int_0^c e^s s^q ds
//   y > 0:       e^c Gamma(q+1, c)
// Past c = 46 the last two pieces are replaced by their asymptotic series
// c^q sum_k f_k c^{-k} (signs alternating and all-positive respectively),
// with falling factorials f_k = q(q-1)...(q-k+1). The odd-order terms cancel
// pairwise and the k = 0 terms cancel the -c^q analytically, which direct
// evaluation cannot do once c^{-2} falls below the double epsilon.
double half_integral_minus_power(double c, double q) {
    const double g1 = std::tgamma(q + 1.0);
    if (c <= 46.0) {
        const double weight = std::exp(-c);
        const double left = weight * g1;
        const double mid = c > 0.0 ? weight * exp_power_lower_integral(c, q) : 0.0;
        const double right = std::exp(c) * g1 * gamma_q(q + 1.0, c);
        return 0.5 * (left + mid + right) - std::pow(c, q);
    }
    double sum = 0.0;
    double fk = q * (q - 1.0);
    double cpk = 1.0 / (c * c);
    double prev = std::abs(fk) * cpk;
    for (int k = 2; k <= 200; k += 2) {
        sum += fk * cpk;
        fk *= (q - k) * (q - k - 1.0);
        cpk /= c * c;
        const double next = std::abs(fk) * cpk;
        // Stop at the smallest term; the series is asymptotic, not convergent.
        if (!(next < prev) || next < 1e-17 * std::abs(sum)) break;
        prev = next;
    }
    return 0.5 * std::exp(-c) * g1 + std::pow(c, q) * sum;
}

}  // namespace

namespace detail {

// Full integral I(c) = int_R e^{-|y|} |c + y|^{2H} dy, split at the kink
// y = -c and at y = 0. Both infinite tails map to finite intervals through
// u = e^{-|y|}, chased with u = w^4 so the logarithmic endpoint at u = 0
// flattens to w^3 log^{2H} and the panel error estimates can certify tight
// tolerances; the finite middle piece carries the |.|^{2H} endpoint factor
// exactly via u = s^{2H+1}. tol is held relative to the max(1, c^{2H}) size
// of the integral, since an absolute target is unreachable once c is large.
double abs_power_exp_integral(double c, double two_h, double tol) {
    const double piece_tol = tol * std::max(1.0, std::pow(c, two_h)) / 3.0;

    // y in [0, inf): u = e^{-y}, u = w^4 gives 4 int_0^1 w^3 (c - 4 ln w)^{2H} dw.
    const double right =
        4.0 * integrate([&](double w) {
                  return w * w * w * std::pow(c - 4.0 * std::log(w), two_h);
              },
                        0.0, 1.0, piece_tol / 4.0, 0.0)
                  .value;

    // y in (-inf, -c]: u = e^{y}, u = e^{-c} w^4; the -c offset cancels ln of
    // the upper limit, leaving 4 e^{-c} int_0^1 w^3 (-4 ln w)^{2H} dw.
    double left = 0.0;
    if (c < 700.0) {
        const double scale = 4.0 * std::exp(-c);
        left = scale * integrate([&](double w) {
                   return w * w * w * std::pow(-4.0 * std::log(w), two_h);
               },
                                 0.0, 1.0, piece_tol / scale, 0.0)
                   .value;
    }

    // y in [-c, 0]: with s = y + c this is e^{-c} int_0^c e^{s} s^{2H} ds.
    // The weight e^{s-c} is negligible below s = c - 46, which also removes
    // the s = 0 endpoint from wide intervals.
    double mid = 0.0;
    if (c > 0.0) {
        const double s_lo = std::max(0.0, c - 46.0);
        if (s_lo > 0.0) {
            mid = integrate(
                      [&](double s) { return std::exp(s - c) * std::pow(s, two_h); }, s_lo,
                      c, piece_tol, 0.0)
                      .value;
        } else {
            const double p = two_h + 1.0;
            mid = integrate(
                      [&](double u) { return std::exp(std::pow(u, 1.0 / p) - c); }, 0.0,
                      std::pow(c, p), piece_tol, 0.0)
                      .value /
                  p;
        }
    }
    return left + mid + right;
}

double kappa_fou_quad(const FsvParams& params, double ell, double quad_tol) {
    const double c = params.lambda * ell;
    const double two_h = 2.0 * params.hurst;
    const double full = abs_power_exp_integral(c, two_h, quad_tol);
    const double bracket = 0.5 * full - std::pow(c, two_h);
    return params.nu * params.nu / (2.0 * std::pow(params.lambda, two_h)) * bracket;
}

}  // namespace detail

double kappa_fou(const FsvParams& params, double ell, double quad_tol) {
    if (!(ell >= 0.0)) throw std::invalid_argument("kappa_fou: ell must be >= 0");
    if (std::abs(params.hurst - 0.5) < 1e-12) {
        return params.nu * params.nu / (2.0 * params.lambda) * std::exp(-params.lambda * ell);
    }
    // The incomplete-gamma path is accurate to ~1e-12 relative, inside any
    // configurable tolerance; quad_tol governs the adaptive reference engine
    // detail::kappa_fou_quad, which tests hold this path against.
    (void)quad_tol;
    const double two_h = 2.0 * params.hurst;
    const double bracket = half_integral_minus_power(params.lambda * ell, two_h);
    return params.nu * params.nu / (2.0 * std::pow(params.lambda, two_h)) * bracket;
}

double kappa_zero(const FsvParams& params) {
    const double two_h = 2.0 * params.hurst;
    return params.nu * params.nu * std::tgamma(1.0 + two_h) /
           (2.0 * std::pow(params.lambda, two_h));
}

double kappa_gbss(const GbssParams& params, double ell) {
    if (!(ell >= 0.0)) throw std::invalid_argument("kappa_gbss: ell must be >= 0");
    const double nu2 = params.nu * params.nu;
    if (ell == 0.0) {
        return nu2 * std::tgamma(2.0 * params.alpha + 1.0) /
               std::pow(2.0 * params.lambda, 2.0 * params.alpha + 1.0);
    }
    const double order = params.alpha + 0.5;
    double value;
    try {
        const double bessel = std::cyl_bessel_k(order, params.lambda * ell);
        value = nu2 * std::tgamma(params.alpha + 1.0) / std::sqrt(M_PI) *
                std::pow(ell / (2.0 * params.lambda), order) * bessel;
    } catch (const std::exception& e) {
        throw NumericError(std::string("kappa_gbss: Bessel evaluation failed: ") + e.what());
    }
    if (!std::isfinite(value)) {
        throw NumericError("kappa_gbss: Bessel evaluation overflowed");
    }
    return value;
}

double CovKernel::kappa(double ell) const {
    switch (model_) {
        case Model::Fsv:
            return kappa_fou(*fsv_, ell, quad_tol_);
        case Model::GammaBss:
            return kappa_gbss(*gbss_, ell);
        case Model::ConstLogVol:
            return 0.0;
    }
    return 0.0;
}

double CovKernel::kappa0() const {
    switch (model_) {
        case Model::Fsv:
            return kappa_zero(*fsv_);
        case Model::GammaBss:
            return kappa_gbss(*gbss_, 0.0);
        case Model::ConstLogVol:
            return 0.0;
    }
    return 0.0;
}

double CovKernel::cusp_exponent() const {
    switch (model_) {
        case Model::Fsv:
            return std::min(2.0 * fsv_->hurst, 1.0);
        case Model::GammaBss:
            return std::min(2.0 * gbss_->alpha + 1.0, 1.0);
        case Model::ConstLogVol:
            return 1.0;
    }
    return 1.0;
}

std::pair<double, double> kappa_tail_rate(const CovKernel& kernel) {
    switch (kernel.model()) {
        case CovKernel::Model::Fsv: {
            const FsvParams& p = *kernel.fsv_params();
            if (std::abs(p.hurst - 0.5) < 1e-12) return {0.0, p.lambda};
            return {2.0 * (1.0 - p.hurst), 0.0};
        }
        case CovKernel::Model::GammaBss: {
            const GbssParams& p = *kernel.gbss_params();
            return {p.alpha, p.lambda};
        }
        case CovKernel::Model::ConstLogVol:
            break;
    }
    throw std::invalid_argument("kappa_tail_rate: kernel must be fSV or Gamma-BSS");
}

}  // namespace fsv
