#pragma once

// Log-variance autocovariance kernels kappa(ell) = cov(Y_0, Y_ell) for the
// fSV (fOU log-variance) and Gamma-BSS models, plus the degenerate constant
// kernel used by tests.

#include <optional>
#include <utility>

#include "fsv/params.hpp"

namespace fsv {

// nu^2/(2 lambda^{2H}) * (1/2 * int e^{-|y|} |lambda*ell + y|^{2H} dy - (lambda*ell)^{2H}).
// Uses the exponential closed form when |hurst - 0.5| < 1e-12.
double kappa_fou(const FsvParams& params, double ell, double quad_tol = 1e-10);

// Variance of the log-variance process: nu^2 Gamma(1+2H) / (2 lambda^{2H}).
double kappa_zero(const FsvParams& params);

// Gamma-kernel BSS autocovariance; Bessel-K form for ell > 0.
double kappa_gbss(const GbssParams& params, double ell);

namespace detail {
// Quadrature branch of kappa_fou regardless of hurst; the closed-form
// dispatch above is validated against this.
double kappa_fou_quad(const FsvParams& params, double ell, double quad_tol);
}  // namespace detail

class CovKernel {
  public:
    enum class Model { Fsv, GammaBss, ConstLogVol };

    static CovKernel fsv(const FsvParams& p, double quad_tol = 1e-10) {
        CovKernel k;
        k.model_ = Model::Fsv;
        k.fsv_ = p;
        k.quad_tol_ = quad_tol;
        return k;
    }
    static CovKernel gbss(const GbssParams& p, double quad_tol = 1e-10) {
        CovKernel k;
        k.model_ = Model::GammaBss;
        k.gbss_ = p;
        k.quad_tol_ = quad_tol;
        return k;
    }
    static CovKernel const_log_vol() {
        CovKernel k;
        k.model_ = Model::ConstLogVol;
        return k;
    }

    Model model() const { return model_; }
    double quad_tol() const { return quad_tol_; }
    const std::optional<FsvParams>& fsv_params() const { return fsv_; }
    const std::optional<GbssParams>& gbss_params() const { return gbss_; }

    double kappa(double ell) const;
    double kappa0() const;

    // Local regularity exponent q of kappa(0) - kappa(ell) ~ ell^q near 0;
    // drives the cusp substitution in the moment quadrature. Returns 1 when
    // the kernel needs no special handling.
    double cusp_exponent() const;

  private:
    Model model_ = Model::ConstLogVol;
    std::optional<FsvParams> fsv_;
    std::optional<GbssParams> gbss_;
    double quad_tol_ = 1e-10;
};

// Polynomial/exponential tail signature (beta, rho) of kappa:
// kappa(ell) ~ ell^{-beta} e^{-rho ell} * slowly varying.
std::pair<double, double> kappa_tail_rate(const CovKernel& kernel);

}  // namespace fsv
