#pragma once

#include <stdexcept>

namespace fsv {

// fSV parameter set (daily units): xi is the unconditional mean of spot
// variance, lambda the mean-reversion rate, nu the vol-of-vol, hurst the
// roughness index of the driving fBm.
struct FsvParams {
    double xi;
    double lambda;
    double nu;
    double hurst;

    FsvParams(double xi_, double lambda_, double nu_, double hurst_)
        : xi(xi_), lambda(lambda_), nu(nu_), hurst(hurst_) {
        if (!(xi > 0.0)) throw std::invalid_argument("FsvParams: xi must be > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("FsvParams: lambda must be > 0");
        if (!(nu > 0.0)) throw std::invalid_argument("FsvParams: nu must be > 0");
        if (!(hurst > 0.0 && hurst < 1.0)) {
            throw std::invalid_argument("FsvParams: hurst must be in (0, 1)");
        }
    }
};

// Gamma-kernel Brownian semistationary log-variance model.
struct GbssParams {
    double xi;
    double lambda;
    double nu;
    double alpha;

    GbssParams(double xi_, double lambda_, double nu_, double alpha_)
        : xi(xi_), lambda(lambda_), nu(nu_), alpha(alpha_) {
        if (!(xi > 0.0)) throw std::invalid_argument("GbssParams: xi must be > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("GbssParams: lambda must be > 0");
        if (!(nu > 0.0)) throw std::invalid_argument("GbssParams: nu must be > 0");
        if (!(alpha > -0.5)) throw std::invalid_argument("GbssParams: alpha must be > -0.5");
    }
};

}  // namespace fsv
