#include "fsv/iv_moments.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "fsv/quadrature.hpp"

namespace fsv {

namespace {

// Relative tolerances scaled by integral dimension; the GMM hot path only
// ever evaluates the 1D moments.
constexpr double kRel1d = 1e-9;
constexpr double kRel2d = 1e-6;
constexpr double kRel3d = 1e-5;

// int_0^1 (1-y) e^{kappa(l+y)} dy; the kappa argument touches 0 only at l=0.
double cross_term_up(const CovKernel& kernel, int ell) {
    auto f = [&](double y) { return (1.0 - y) * std::exp(kernel.kappa(ell + y)); };
    if (ell == 0) {
        return integrate_left_cusp(f, 0.0, 1.0, kernel.cusp_exponent(), 0.0, kRel1d).value;
    }
    return integrate(f, 0.0, 1.0, 0.0, kRel1d).value;
}

// int_0^1 (1-y) e^{kappa(|l-y|)} dy; the argument touches 0 at y=0 for l=0
// and at y=1 for l=1, so those ends get the cusp-flattening substitution.
double cross_term_down(const CovKernel& kernel, int ell) {
    if (ell == 0) return cross_term_up(kernel, 0);
    auto f = [&](double y) { return (1.0 - y) * std::exp(kernel.kappa(std::abs(ell - y))); };
    if (ell == 1) {
        return integrate_right_cusp(f, 0.0, 1.0, kernel.cusp_exponent(), 0.0, kRel1d).value;
    }
    return integrate(f, 0.0, 1.0, 0.0, kRel1d).value;
}

void warn_if_rough(const CovKernel& kernel, const char* who) {
    if (kernel.model() == CovKernel::Model::Fsv && kernel.fsv_params()->hurst < 0.2) {
        std::cerr << who << ": hurst < 0.2, the nested quadrature may take long\n";
    }
}

}  // namespace

void MomentSpec::validate() const {
    if (lags.empty()) throw std::invalid_argument("MomentSpec: lags must be nonempty");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 0) throw std::invalid_argument("MomentSpec: lags must be nonnegative");
        if (i > 0 && lags[i] <= lags[i - 1]) {
            throw std::invalid_argument("MomentSpec: lags must be strictly increasing");
        }
    }
    if (correction != CorrectionMode::None) {
        if (lags.front() != 0) {
            throw std::invalid_argument("MomentSpec: a correction requires lag 0");
        }
        if (n_intraday < 1) {
            throw std::invalid_argument("MomentSpec: a correction requires n_intraday");
        }
    }
}

double mean_iv(const CovKernel&, double xi) {
    if (!(xi > 0.0)) throw std::invalid_argument("mean_iv: xi must be > 0");
    return xi;
}

double raw_second_moment_iv(const CovKernel& kernel, double xi, int ell) {
    if (ell < 0) throw std::invalid_argument("raw_second_moment_iv: ell must be >= 0");
    return xi * xi * (cross_term_up(kernel, ell) + cross_term_down(kernel, ell));
}

double autocov_iv(const CovKernel& kernel, double xi, int ell) {
    return raw_second_moment_iv(kernel, xi, ell) - xi * xi;
}

double third_moment_iv(const CovKernel& kernel, double xi) {
    warn_if_rough(kernel, "third_moment_iv");
    const double q = kernel.cusp_exponent();
    // Inner integral over y in [0, x] has cusps at both ends; split at x/2.
    auto inner = [&](double x) {
        auto g = [&](double y) { return std::exp(kernel.kappa(x - y) + kernel.kappa(y)); };
        const double half = 0.5 * x;
        return integrate_left_cusp(g, 0.0, half, q, 0.0, 1e-8).value +
               integrate_right_cusp(g, half, x, q, 0.0, 1e-8).value;
    };
    auto f = [&](double x) { return (1.0 - x) * std::exp(kernel.kappa(x)) * inner(x); };
    const double outer = integrate_left_cusp(f, 0.0, 1.0, q, 0.0, kRel2d).value;
    return 6.0 * xi * xi * xi * outer;
}

double fourth_moment_iv(const CovKernel& kernel, double xi) {
    warn_if_rough(kernel, "fourth_moment_iv");
    const double q = kernel.cusp_exponent();
    auto innermost = [&](double x, double y) {
        auto g = [&](double z) {
            return std::exp(kernel.kappa(z) + kernel.kappa(y - z) + kernel.kappa(x - z));
        };
        const double half = 0.5 * y;
        return integrate_left_cusp(g, 0.0, half, q, 0.0, 1e-7).value +
               integrate_right_cusp(g, half, y, q, 0.0, 1e-7).value;
    };
    auto middle = [&](double x) {
        auto g = [&](double y) {
            return std::exp(kernel.kappa(y) + kernel.kappa(x - y)) * innermost(x, y);
        };
        const double half = 0.5 * x;
        return integrate_left_cusp(g, 0.0, half, q, 0.0, 1e-6).value +
               integrate_right_cusp(g, half, x, q, 0.0, 1e-6).value;
    };
    auto f = [&](double x) { return (1.0 - x) * std::exp(kernel.kappa(x)) * middle(x); };
    const double outer = integrate_left_cusp(f, 0.0, 1.0, q, 0.0, kRel3d).value;
    return 24.0 * xi * xi * xi * xi * outer;
}

double autocov_tail_approx(const CovKernel& kernel, double xi, int ell) {
    if (ell < 1) throw std::invalid_argument("autocov_tail_approx: ell must be >= 1");
    const double xi2 = xi * xi;
    switch (kernel.model()) {
        case CovKernel::Model::Fsv: {
            const FsvParams& p = *kernel.fsv_params();
            if (std::abs(p.hurst - 0.5) < 1e-12) {
                const double rho = p.lambda;
                const double e = std::expm1(rho);
                return xi2 * kernel.kappa(ell) * std::exp(-rho) * e * e / (rho * rho);
            }
            return xi2 * kernel.kappa(ell);
        }
        case CovKernel::Model::GammaBss: {
            const GbssParams& p = *kernel.gbss_params();
            const double e = std::expm1(p.lambda);
            return p.nu * p.nu * xi2 * std::tgamma(p.alpha + 1.0) * e * e /
                   (std::pow(2.0, p.alpha + 1.0) * std::pow(p.lambda, p.alpha + 2.0)) *
                   std::pow(ell, p.alpha) * std::exp(-p.lambda * (ell + 1.0));
        }
        case CovKernel::Model::ConstLogVol:
            return 0.0;
    }
    return 0.0;
}

double lemma_a1_reduce(const std::function<double(double)>& f, int k) {
    if (k < 1) throw std::invalid_argument("lemma_a1_reduce: k must be >= 1");
    auto g = [&](double y) {
        return (1.0 - y) * (f(std::abs(k - 1.0 - y)) + f(k - 1.0 + y));
    };
    return integrate(g, 0.0, 1.0, 0.0, kRel1d).value;
}

MomentVector model_moment_vector(const CovKernel& kernel, double xi, const MomentSpec& spec) {
    spec.validate();
    MomentVector out;
    out.values.reserve(spec.dim());
    out.values.push_back(mean_iv(kernel, xi));
    for (int ell : spec.lags) {
        out.values.push_back(raw_second_moment_iv(kernel, xi, ell));
    }
    if (spec.correction != CorrectionMode::None) {
        if (kernel.model() != CovKernel::Model::Fsv) {
            throw std::invalid_argument(
                "model_moment_vector: corrections are defined for the fSV kernel");
        }
        const FsvParams& p = *kernel.fsv_params();
        const FsvParams with_xi(xi, p.lambda, p.nu, p.hurst);
        // Lag 0 is first by validation, so its raw moment sits at index 1.
        out.values[1] += error_variance_c(with_xi, spec.n_intraday, spec.correction);
    }
    return out;
}

}  // namespace fsv
